#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <string>

#include "melanie/nn/autodiff.hpp"
#include "melanie/nn/model.hpp"

namespace melanie::meta {

// FIFO store of the last C event signatures, at most one per event id.
// Entries are plain copies, unaffected by later parameter updates.
class SignatureBuffer {
 public:
  explicit SignatureBuffer(std::size_t capacity);

  // Replaces an entry with the same event id in place; otherwise appends and
  // evicts the oldest entry when full.
  void push(const nn::GraphSignature& signature);

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return entries_.empty(); }
  const std::deque<nn::GraphSignature>& entries() const noexcept { return entries_; }
  bool contains(const std::string& event_id) const;

  // {"capacity": C, "entries": [{"event_id": ..., "values": [...]}, ...]}
  std::string to_json() const;
  static SignatureBuffer from_json(const std::string& text);
  void save(const std::filesystem::path& file) const;
  static SignatureBuffer load(const std::filesystem::path& file);

 private:
  std::size_t capacity_;
  std::deque<nn::GraphSignature> entries_;
};

// Mean of KL(softmax(H) || softmax(H_j)) over buffered H_j with a different
// event id; 0 when there are none. Throws on a length mismatch.
double signature_divergence(const nn::GraphSignature& signature, const SignatureBuffer& buffer);

// Differentiable form: gradient flows into H only.
nn::Var signature_divergence_expr(const nn::Var& H, const std::string& event_id,
                                  const SignatureBuffer& buffer);

}  // namespace melanie::meta
