// SPDX-License-Identifier: Apache-2.0
#include "pnprl/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace pnprl::harness {

namespace fs = std::filesystem;

std::string report_table(const std::vector<ResultRecord>& records,
                         const std::string& out_csv_path) {
  if (records.empty()) throw std::invalid_argument("report_table: empty results");

  using Setting = std::tuple<std::string, double, double>;  // task, accel, sigma_n
  std::set<Setting> settings;
  std::set<std::string> policy_names;
  struct Acc {
    double psnr = 0.0;
    double iters = 0.0;
    int n = 0;
  };
  std::map<std::pair<std::string, Setting>, Acc> cells;
  for (const ResultRecord& r : records) {
    const Setting s{r.task, r.accel_or_alpha, r.sigma_n};
    settings.insert(s);
    policy_names.insert(r.policy);
    Acc& a = cells[{r.policy, s}];
    a.psnr += r.psnr_db;
    a.iters += r.iterations;
    ++a.n;
  }

  std::ofstream csv(out_csv_path);
  if (!csv) throw std::runtime_error("report_table: cannot open " + out_csv_path);
  csv << "policy";
  for (const Setting& s : settings)
    csv << "," << std::get<0>(s) << "_x" << std::get<1>(s) << "_sn"
        << std::get<2>(s) << "_psnr,"
        << std::get<0>(s) << "_x" << std::get<1>(s) << "_sn" << std::get<2>(s)
        << "_iters";
  csv << "\n";

  std::ostringstream txt;
  txt << std::left << std::setw(16) << "policy";
  for (const Setting& s : settings) {
    std::ostringstream head;
    head << "x" << std::get<1>(s) << "/sn" << std::get<2>(s);
    txt << std::setw(20) << head.str();
  }
  txt << "\n";

  for (const std::string& pol : policy_names) {
    csv << pol;
    txt << std::left << std::setw(16) << pol;
    for (const Setting& s : settings) {
      auto it = cells.find({pol, s});
      if (it == cells.end()) {
        csv << ",,";
        txt << std::setw(20) << "-";
        continue;
      }
      const Acc& a = it->second;
      csv << "," << a.psnr / a.n << "," << a.iters / a.n;
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << a.psnr / a.n << " dB/"
           << std::setprecision(1) << a.iters / a.n << " it";
      txt << std::setw(20) << cell.str();
    }
    csv << "\n";
    txt << "\n";
  }
  return txt.str();
}

void write_svg_curve(const std::string& path, const std::vector<int>& xs,
                     const std::vector<double>& ys, const std::string& title) {
  if (xs.empty() || xs.size() != ys.size())
    throw std::invalid_argument("write_svg_curve: bad data");
  const int W = 640, H = 420, ml = 60, mr = 20, mt = 40, mb = 50;
  const double xmin = xs.front(), xmax = std::max<double>(xs.back(), xmin + 1);
  double ymin = *std::min_element(ys.begin(), ys.end());
  double ymax = *std::max_element(ys.begin(), ys.end());
  if (ymax - ymin < 1e-9) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double yr = ymax - ymin;
  ymin -= 0.05 * yr;
  ymax += 0.05 * yr;

  auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto py = [&](double y) {
    return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
  };

  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_svg_curve: cannot open " + path);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
    << H << "' viewBox='0 0 " << W << " " << H << "'>\n";
  f << "<rect width='100%' height='100%' fill='white'/>\n";
  f << "<text x='" << W / 2 << "' y='24' text-anchor='middle' "
    << "font-family='sans-serif' font-size='15'>" << title << "</text>\n";
  // axes
  f << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr
    << "' y2='" << H - mb << "' stroke='black'/>\n";
  f << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
    << H - mb << "' stroke='black'/>\n";
  f << "<text x='" << (W + ml - mr) / 2 << "' y='" << H - 12
    << "' text-anchor='middle' font-family='sans-serif' font-size='12'>"
    << "iteration</text>\n";
  f << "<text x='16' y='" << (H + mt - mb) / 2
    << "' text-anchor='middle' font-family='sans-serif' font-size='12' "
    << "transform='rotate(-90 16 " << (H + mt - mb) / 2 << ")'>PSNR (dB)"
    << "</text>\n";
  // y ticks
  for (int k = 0; k <= 4; ++k) {
    const double y = ymin + (ymax - ymin) * k / 4;
    f << "<line x1='" << ml - 4 << "' y1='" << py(y) << "' x2='" << ml
      << "' y2='" << py(y) << "' stroke='black'/>\n";
    f << "<text x='" << ml - 8 << "' y='" << py(y) + 4
      << "' text-anchor='end' font-family='sans-serif' font-size='11'>"
      << std::fixed << std::setprecision(1) << y << "</text>\n";
  }
  // polyline
  f << "<polyline fill='none' stroke='#c2410c' stroke-width='2' points='";
  for (std::size_t i = 0; i < xs.size(); ++i)
    f << px(xs[i]) << "," << py(ys[i]) << " ";
  f << "'/>\n</svg>\n";
}

int report_curves(const std::string& eval_dir) {
  const std::string cdir = eval_dir + "/curves";
  if (!fs::is_directory(cdir))
    throw std::runtime_error("report_curves: no curves directory in " + eval_dir);
  int count = 0;
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(cdir))
    if (e.path().extension() == ".csv") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  for (const std::string& f : files) {
    std::ifstream in(f);
    std::string line;
    std::getline(in, line);  // header
    std::vector<int> xs;
    std::vector<double> ys;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      xs.push_back(std::stoi(line.substr(0, comma)));
      ys.push_back(std::stod(line.substr(comma + 1)));
    }
    if (xs.empty()) continue;
    const std::string svg = f.substr(0, f.size() - 4) + ".svg";
    write_svg_curve(svg, xs, ys, fs::path(f).stem().string());
    ++count;
  }
  return count;
}

}  // namespace pnprl::harness
