// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pnprl/harness/evaluate.hpp"

namespace pnprl::harness {

// Policy x setting grid of mean PSNR / mean iterations, written as CSV and a
// plain-text table. Returns the text rendering.
std::string report_table(const std::vector<ResultRecord>& records,
                         const std::string& out_csv_path);

// Renders every curve CSV under <eval_dir>/curves to an SVG next to it.
// Returns the number of plots written.
int report_curves(const std::string& eval_dir);

// Minimal SVG line plot (iteration vs PSNR).
void write_svg_curve(const std::string& path, const std::vector<int>& xs,
                     const std::vector<double>& ys, const std::string& title);

}  // namespace pnprl::harness
