#include "brownmeasure/cli.hpp"

int main(int argc, char** argv) { return brown::cli::main(argc, argv); }
