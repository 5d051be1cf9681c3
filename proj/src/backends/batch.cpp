#include "forge/backends/batch.hpp"

#include <fstream>

#include "forge/common/error.hpp"
#include "forge/common/rng.hpp"
#include "forge/common/text.hpp"

namespace forge::backends {

nlohmann::json Checkpoint::to_json() const {
  return {{"completed", completed},
          {"output_bytes", output_bytes},
          {"total", total},
          {"input_checksum", input_checksum},
          {"model_id", model_id}};
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
  try {
    Checkpoint c;
    c.completed = j.at("completed").get<std::size_t>();
    c.output_bytes = j.at("output_bytes").get<std::uint64_t>();
    c.total = j.at("total").get<std::size_t>();
    c.input_checksum = j.at("input_checksum").get<std::string>();
    c.model_id = j.at("model_id").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint: ") + e.what());
  }
}

std::filesystem::path checkpoint_path(const std::filesystem::path& output) {
  auto p = output;
  p += ".checkpoint.json";
  return p;
}

std::optional<Checkpoint> read_checkpoint(const std::filesystem::path& output) {
  const auto path = checkpoint_path(output);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return Checkpoint::from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> translate_batch(const BatchJob& job, Translator& translator,
                                         const std::function<void(std::size_t)>& progress) {
  if (job.checkpoint_every == 0) throw ValidationError("checkpoint_every must be >= 1");
  const std::size_t total = job.inputs.size();
  const std::string model_id = translator.spec().model_id;

  Checkpoint ck;
  ck.total = total;
  ck.input_checksum = job.input_checksum;
  ck.model_id = model_id;
  const auto previous = read_checkpoint(job.output);
  const bool resumable = previous && previous->input_checksum == job.input_checksum &&
                         previous->model_id == model_id && previous->total == total &&
                         previous->completed <= total && std::filesystem::exists(job.output) &&
                         std::filesystem::file_size(job.output) >= previous->output_bytes;
  if (resumable) {
    ck.completed = previous->completed;
    ck.output_bytes = previous->output_bytes;
    std::filesystem::resize_file(job.output, ck.output_bytes);
  } else {
    write_file_atomic(job.output, "");
    write_file_atomic(checkpoint_path(job.output), ck.to_json().dump() + "\n");
  }

  std::ofstream out(job.output, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + job.output.string());
  for (std::size_t begin = ck.completed; begin < total; begin += job.checkpoint_every) {
    const std::size_t end = std::min(total, begin + job.checkpoint_every);
    const std::vector<std::string> chunk(job.inputs.begin() + static_cast<std::ptrdiff_t>(begin),
                                         job.inputs.begin() + static_cast<std::ptrdiff_t>(end));
    const auto translated = translator.translate(chunk);
    if (translated.size() != chunk.size()) {
      throw ProtocolError("chunk " + std::to_string(begin / job.checkpoint_every) +
                          " (sentences " + std::to_string(begin) + "-" + std::to_string(end - 1) +
                          ") of '" + model_id + "': " + std::to_string(translated.size()) +
                          " outputs for " + std::to_string(chunk.size()) + " inputs");
    }
    std::string bytes;
    for (const auto& t : translated) {
      bytes += single_line(t);
      bytes += '\n';
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write to " + job.output.string() + " failed");
    ck.completed = end;
    ck.output_bytes += bytes.size();
    write_file_atomic(checkpoint_path(job.output), ck.to_json().dump() + "\n");
    if (progress) progress(end);
  }
  out.close();
  auto lines = read_lines(job.output);
  if (lines.size() != total) {
    throw IoError(job.output.string() + " holds " + std::to_string(lines.size()) +
                  " lines, expected " + std::to_string(total));
  }
  return lines;
}

mono::MonoCorpus sample_mono(const mono::MonoCorpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n > corpus.sentences.size()) {
    throw ValidationError("cannot sample " + std::to_string(n) + " sentences from '" +
                          corpus.manifest.name + "' which has " +
                          std::to_string(corpus.sentences.size()));
  }
  mono::MonoCorpus out;
  for (std::size_t i : sample_indices(corpus.sentences.size(), n, seed)) {
    out.sentences.push_back(corpus.sentences[i]);
  }
  out.manifest.name = corpus.manifest.name + ".sample" + std::to_string(n);
  out.manifest.lang = corpus.manifest.lang;
  out.manifest.source = corpus.manifest.source;
  out.manifest.count = n;
  out.manifest.seed = seed;
  out.manifest.checksum = mono::mono_checksum(out.sentences);
  out.manifest.attributes = {{"parent", corpus.manifest.checksum},
                             {"parent_count", corpus.sentences.size()}};
  return out;
}

}  // namespace forge::backends
