// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "pnprl/nn/layers.hpp"

namespace pnprl::nn {

// Checkpoint container: JSON metadata followed by named raw double arrays.
void save_checkpoint(const std::string& path, const ParamList& arrays,
                     const nlohmann::json& meta);

// Loads arrays into an existing parameter list (matched by name and shape).
// Returns the metadata. Arrays present in the file but not in `arrays` are
// ignored only if allow_extra is set.
nlohmann::json load_checkpoint(const std::string& path, const ParamList& arrays,
                               bool allow_extra = false);

nlohmann::json read_checkpoint_meta(const std::string& path);

std::string config_hash(const nlohmann::json& cfg);

}  // namespace pnprl::nn
