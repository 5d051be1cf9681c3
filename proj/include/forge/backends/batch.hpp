#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/backends/translator.hpp"
#include "forge/mono/mono.hpp"

namespace forge::backends {

inline constexpr std::size_t kDefaultCheckpointEvery = 1000;

struct BatchJob {
  std::vector<std::string> inputs;
  std::string input_checksum;  // identifies the input across restarts
  std::filesystem::path output;
  std::size_t checkpoint_every = kDefaultCheckpointEvery;
};

// Progress record kept next to the output (`<output>.checkpoint.json`).
struct Checkpoint {
  std::size_t completed = 0;     // resume token: sentences safely written
  std::uint64_t output_bytes = 0;
  std::size_t total = 0;
  std::string input_checksum;
  std::string model_id;

  nlohmann::json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);
};

std::filesystem::path checkpoint_path(const std::filesystem::path& output);
std::optional<Checkpoint> read_checkpoint(const std::filesystem::path& output);

// Translates `job.inputs` chunk by chunk, appending to `job.output` and
// checkpointing after every chunk. A matching checkpoint resumes where it
// stopped (bytes written past it are discarded). A chunk whose output count
// differs from its input count throws ProtocolError naming the chunk; any
// failure leaves the last checkpoint in place. Returns all outputs.
std::vector<std::string> translate_batch(const BatchJob& job, Translator& translator,
                                         const std::function<void(std::size_t)>& progress = {});

// Uniform sample of n sentences without replacement, in draw order.
mono::MonoCorpus sample_mono(const mono::MonoCorpus& corpus, std::size_t n, std::uint64_t seed);

}  // namespace forge::backends
