#pragma once

#include <stdexcept>
#include <string>

namespace funreg {

/// Invalid or inconsistent input data (bad files, mismatched grids, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Failed decomposition, singular system, or other numerical breakdown.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class GridMismatchError : public DataError {
public:
    GridMismatchError() : DataError("operands are sampled on different grids") {}
};

}  // namespace funreg
