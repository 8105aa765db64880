#pragma once

#include <string>
#include <vector>

#include "gsim/learn/model.hpp"

namespace gsim::learn {

/// Model file: {"config": {...}, "params": {tensor name -> flat row-major
/// array}}. Decimal representations round-trip exactly, so
/// serialize -> parse -> serialize is byte-identical.
std::string serialize_model(const ModelParams& params);
ModelParams parse_model(const std::string& text);

/// Dataset file: JSON list of {"graph": <graph document>, "targets":
/// {node id -> value}, "mask": [node ids]}.
std::string serialize_dataset(const std::vector<Batch>& dataset);
std::vector<Batch> parse_dataset(const std::string& text);

} // namespace gsim::learn
