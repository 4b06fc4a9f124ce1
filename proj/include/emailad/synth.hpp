#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "emailad/corpus.hpp"

namespace emailad {

// Planted-signal corpus. Spam differs from ham in Message-ID presence,
// From/Return-Path domain agreement and Received hop count; phishing differs
// in Return-Path and Reply-To agreement. Everything else (noise X- fields,
// timezone, content type, recipients) is drawn identically for every class.
struct SynthOptions {
  std::size_t ham = 1000;
  std::size_t spam = 1000;
  std::size_t phishing = 500;
  // Noise X- fields follow one of `mailer_families` templates (each field in a
  // template with noise_probability), picked independently of the label;
  // each field then flips with noise_flip.
  std::size_t noise_fields = 30;
  double noise_probability = 0.5;
  std::size_t mailer_families = 8;
  double noise_flip = 0.05;
  double spam_missing_msgid = 0.8;
  double ham_missing_msgid = 0.02;
  double spam_return_path_mismatch = 0.7;
  double ham_return_path_mismatch = 0.05;
  int spam_hop_shift = 2;
  double phishing_return_path_mismatch = 0.7;
  double phishing_reply_to = 0.8;           // P(Reply-To present)
  double phishing_reply_to_mismatch = 0.85;  // given present
  double ham_reply_to = 0.2;                 // always matching From
  std::size_t messages_per_mbox = 100;
  std::uint64_t seed = 42;
};

// Header block (CRLF line ends, terminated by an empty line) plus a short body.
std::string synth_email(Label label, std::uint64_t seed, const SynthOptions& options = {});

struct SynthLayout {
  std::filesystem::path trec_index;  // <dir>/trec/full/index
  std::filesystem::path trec_root;   // <dir>/trec/full
  std::filesystem::path phishing_dir;
};

// Writes <dir>/trec/{full/index,data/inmail.N} and <dir>/phishing/*.mbox.
// Ham and spam are interleaved in the index by a seeded shuffle.
SynthLayout write_synthetic_corpus(const std::filesystem::path& dir, const SynthOptions& options = {});

}  // namespace emailad
