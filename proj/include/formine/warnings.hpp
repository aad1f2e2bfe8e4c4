#pragma once

#include <string>
#include <utility>
#include <vector>

namespace formine {

/// Non-fatal condition recorded while processing. origin_id is stamped by the
/// pipeline once the owning bundle is known; stage names the pipeline step.
struct Warning {
  std::string origin_id;
  std::string stage;
  std::string reason;
};

using Warnings = std::vector<Warning>;

inline void warn(Warnings* sink, std::string stage, std::string reason) {
  if (sink) sink->push_back({"", std::move(stage), std::move(reason)});
}

}  // namespace formine
