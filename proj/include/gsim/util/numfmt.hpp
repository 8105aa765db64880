#pragma once

#include <string>

namespace gsim::util {

/// Formats a finite double with the shortest decimal representation that
/// parses back to the identical bit pattern. Used everywhere a number is
/// written to a text artifact, so reruns produce byte-identical files.
std::string format_double(double value);

} // namespace gsim::util
