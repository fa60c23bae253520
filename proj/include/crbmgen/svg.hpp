#pragma once

#include <string>

#include "crbmgen/eval.hpp"
#include "crbmgen/types.hpp"

namespace crbmgen {

// Deterministic SVG 1.1 renderers. Output depends only on the input values,
// so identical inputs produce identical bytes. Data cells carry
// class="cell", legend swatches class="legend".

/// Heatmap of a matrix, rows top to bottom, dark blue -> light blue -> red.
std::string render_heatmap(const Matrix& matrix, const std::string& title = "");

/// Bar chart of a vector around a zero baseline. Throws Error when empty.
std::string render_bars(const Vector& values, const std::string& title = "");

/// Triangle of key labels, apex on top, with a legend of the keys present.
std::string render_keyscape(const Keyscape& scape, const std::string& title = "");

}  // namespace crbmgen
