// Acceptance gate: runs every battery criterion and exits nonzero if
// any fails. One PASS/FAIL line per criterion goes to stdout.

#include <iostream>

#include "qkd/verify.hpp"

int main() { return qkd::verify_main("", std::cout); }
