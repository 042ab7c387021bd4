#pragma once

#include <string>

#include "dll/data.hpp"

namespace dll {

// CSV dataset file: UTF-8, comma separated, LF line endings, header
// "x0,...,x{d-1},y1,y2". An empty label cell means the label is missing.
Dataset load_csv(const std::string& path, TaskKind task);

// Floats are written with 17 significant digits so a write/load round trip
// reproduces every sample exactly.
void save_csv(const std::string& path, const Dataset& dataset);

}  // namespace dll
