#define DOCTEST_CONFIG_IMPLEMENT

#include <doctest.h>

#include "qpt/real.hpp"

int main(int argc, char** argv) {
  qpt::set_precision_bits(256);
  return doctest::Context(argc, argv).run();
}
