#include "persuasion/cli.h"

int main(int argc, char** argv) { return persuasion::run_command(argc, argv); }
