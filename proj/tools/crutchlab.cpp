#include "crutchlab/app/cli.hpp"

int main(int argc, char** argv) { return crutchlab::app::run(argc, argv); }
