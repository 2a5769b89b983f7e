#include "tsso/experiment.hpp"

int main(int argc, char** argv) { return tsso::cli_main(argc, argv); }
