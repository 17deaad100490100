#include "melanie/meta/signature_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "melanie/instrumentation.hpp"

namespace melanie::meta {

SignatureBuffer::SignatureBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("signature buffer capacity must be > 0");
}

void SignatureBuffer::push(const nn::GraphSignature& signature) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const nn::GraphSignature& e) {
    return e.event_id == signature.event_id;
  });
  if (it != entries_.end()) {
    it->values = signature.values;
    return;
  }
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(nn::GraphSignature{signature.values, signature.event_id});
}

bool SignatureBuffer::contains(const std::string& event_id) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const nn::GraphSignature& e) { return e.event_id == event_id; });
}

std::string SignatureBuffer::to_json() const {
  nlohmann::json doc;
  doc["capacity"] = capacity_;
  doc["entries"] = nlohmann::json::array();
  for (const nn::GraphSignature& e : entries_) {
    std::vector<double> values(e.values.data(), e.values.data() + e.values.size());
    doc["entries"].push_back({{"event_id", e.event_id}, {"values", values}});
  }
  return doc.dump(1);
}

SignatureBuffer SignatureBuffer::from_json(const std::string& text) {
  try {
    const nlohmann::json doc = nlohmann::json::parse(text);
    SignatureBuffer buffer(doc.at("capacity").get<std::size_t>());
    for (const auto& e : doc.at("entries")) {
      const auto values = e.at("values").get<std::vector<double>>();
      nn::GraphSignature sig;
      sig.event_id = e.at("event_id").get<std::string>();
      sig.values = Eigen::Map<const nn::Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
      buffer.push(sig);
    }
    return buffer;
  } catch (const nlohmann::json::exception& ex) {
    throw std::runtime_error(std::string("signature buffer: ") + ex.what());
  }
}

void SignatureBuffer::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << to_json() << '\n';
}

SignatureBuffer SignatureBuffer::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

namespace {

nn::Vector log_softmax(const nn::Vector& v) {
  const double m = v.maxCoeff();
  const double lse = m + std::log((v.array() - m).exp().sum());
  return v.array() - lse;
}

std::vector<const nn::GraphSignature*> others(const std::string& event_id, Eigen::Index length,
                                              const SignatureBuffer& buffer) {
  std::vector<const nn::GraphSignature*> out;
  for (const nn::GraphSignature& e : buffer.entries()) {
    if (e.values.size() != length) {
      throw std::invalid_argument("signature_divergence: signature lengths differ");
    }
    if (e.event_id != event_id) out.push_back(&e);
  }
  return out;
}

}  // namespace

double signature_divergence(const nn::GraphSignature& signature, const SignatureBuffer& buffer) {
  ++instrumentation::counters().signature_divergences;
  const auto refs = others(signature.event_id, signature.values.size(), buffer);
  if (refs.empty()) return 0.0;
  const nn::Vector lp = log_softmax(signature.values);
  const nn::Vector p = lp.array().exp();
  double total = 0.0;
  for (const nn::GraphSignature* q : refs) {
    total += p.dot(lp - log_softmax(q->values));
  }
  return std::max(0.0, total / static_cast<double>(refs.size()));
}

nn::Var signature_divergence_expr(const nn::Var& H, const std::string& event_id,
                                  const SignatureBuffer& buffer) {
  ++instrumentation::counters().signature_divergences;
  nn::Tape& tape = H.tape();
  const auto refs = others(event_id, H.rows(), buffer);
  if (refs.empty()) return tape.constant(nn::Matrix::Zero(1, 1));
  // mean_j sum p (lp - lq_j) = sum p (lp - mean_j lq_j)
  nn::Vector mean_lq = nn::Vector::Zero(H.rows());
  for (const nn::GraphSignature* q : refs) mean_lq += log_softmax(q->values);
  mean_lq /= static_cast<double>(refs.size());
  nn::Var lp = nn::log_softmax(H);
  nn::Var p = nn::exp(lp);
  return nn::sum(nn::cwise_product(p, lp - tape.constant(mean_lq)));
}

}  // namespace melanie::meta
