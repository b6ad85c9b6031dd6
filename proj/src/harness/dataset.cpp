// SPDX-License-Identifier: Apache-2.0
#include "pnprl/harness/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "pnprl/core/image_io.hpp"

namespace pnprl::harness {

Dataset ingest_dataset(const std::string& path, int resize, int limit) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(path))
    throw std::runtime_error("ingest_dataset: not a directory: " + path);

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png" || ext == ".pgm" || ext == ".pnm")
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());

  Dataset out;
  for (const std::string& f : files) {
    if (limit > 0 && static_cast<int>(out.images.size()) >= limit) break;
    try {
      Tensor img = load_gray(f);
      if (resize > 0) img = resize_bilinear(img, resize, resize);
      out.images.push_back(std::move(img));
      out.ids.push_back(fs::path(f).stem().string());
    } catch (const std::exception& e) {
      std::fprintf(stderr, "[pnprl] skipping unreadable image %s: %s\n",
                   f.c_str(), e.what());
      ++out.skipped;
    }
  }
  if (out.images.empty())
    throw std::runtime_error("ingest_dataset: no readable images in " + path);
  return out;
}

}  // namespace pnprl::harness
