#include "argmine/cli.hpp"

int main(int argc, char** argv) {
  argmine::cli::Environment env;
  return argmine::cli::main(argc, argv, env);
}
