#include "drq/experiment.hpp"

int main(int argc, char** argv) { return drq::run_cli(argc, argv); }
