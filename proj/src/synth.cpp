#include "emailad/synth.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <random>
#include <vector>

#include "emailad/error.hpp"
#include "emailad/util.hpp"

namespace emailad {

namespace fs = std::filesystem;

namespace {

using Rng = std::mt19937_64;

constexpr std::array kSenderDomains = {"example.org",   "mail.example.net", "corp.example.com", "lists.example.edu",
                                       "news.example.info", "shop.example.biz", "home.example.us", "uni.example.ac"};
constexpr std::array kBulkDomains = {"bulk-offers.example", "cheap-deals.example", "promo-blast.example",
                                     "mass-mailer.example"};
constexpr std::array kBankDomains = {"secure-bank.example", "account-verify.example", "paypal-help.example"};
constexpr std::array kZones = {"-0400", "-0700", "+0000", "+0100", "+0200"};
constexpr std::array kUsers = {"alice", "bob", "carol", "dave", "erin", "frank", "grace", "heidi", "ivan", "judy"};
constexpr std::array kDays = {"Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
constexpr const char* kRecipientDomain = "inbox.example.com";
constexpr const char* kRelay = "relay.example.net";

bool coin(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

template <typename A>
std::string pick(Rng& rng, const A& options) {
  return options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
}

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string two(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

std::string rfc_date(Rng& rng, int day_offset, const std::string& zone) {
  const int day = 1 + day_offset % 28;
  // April 2007 starts on a Sunday.
  return std::string(kDays[static_cast<std::size_t>((day - 1) % 7)]) + ", " + std::to_string(day) + " Apr 2007 " +
         two(uniform(rng, 0, 23)) + ":" + two(uniform(rng, 0, 59)) + ":" + two(uniform(rng, 0, 59)) + " " + zone;
}

std::string token(Rng& rng, std::size_t n) {
  static constexpr char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += alphabet[uniform(rng, 0, 35)];
  return s;
}

}  // namespace

std::string synth_email(Label label, std::uint64_t seed, const SynthOptions& o) {
  Rng rng(seed);
  const bool spam = label == Label::Spam, phish = label == Label::Phishing;

  std::string from_domain = spam ? pick(rng, kBulkDomains) : phish ? pick(rng, kBankDomains) : pick(rng, kSenderDomains);
  std::string user = pick(rng, kUsers);
  std::string zone = pick(rng, kZones);
  const int day = uniform(rng, 0, 27);

  double rp_mismatch = spam ? o.spam_return_path_mismatch : phish ? o.phishing_return_path_mismatch : o.ham_return_path_mismatch;
  std::string rp_domain = from_domain;
  if (coin(rng, rp_mismatch)) {
    do rp_domain = pick(rng, kSenderDomains);
    while (rp_domain == from_domain);
  }

  int hops = uniform(rng, 1, 3) + (spam ? o.spam_hop_shift : 0);

  std::vector<std::pair<std::string, std::string>> f;
  f.emplace_back("Return-Path", "<" + user + "@" + rp_domain + ">");
  // Received fields are prepended by each relay, so the last one is the origin.
  std::vector<std::string> chain{"mail." + from_domain};
  for (int h = 1; h < hops; ++h) chain.push_back("mx" + std::to_string(h) + "." + kRelay);
  chain.push_back(std::string("mx.") + kRecipientDomain);
  for (int h = hops - 1; h >= 0; --h) {
    const auto& src = chain[static_cast<std::size_t>(h)];
    const auto& dst = chain[static_cast<std::size_t>(h) + 1];
    f.emplace_back("Received", "from " + src + " (" + src + " [10." + std::to_string(uniform(rng, 0, 255)) + "." +
                                   std::to_string(uniform(rng, 0, 255)) + "." + std::to_string(uniform(rng, 1, 254)) +
                                   "])\r\n\tby " + dst + " with ESMTP id " + token(rng, 10) + ";\r\n\t" +
                                   rfc_date(rng, day, zone));
  }

  double missing_msgid = spam ? o.spam_missing_msgid : o.ham_missing_msgid;
  if (!coin(rng, missing_msgid)) f.emplace_back("Message-ID", "<" + token(rng, 16) + "@" + kRelay + ">");
  f.emplace_back("Date", rfc_date(rng, day, zone));
  f.emplace_back("From", "\"" + user + "\" <" + user + "@" + from_domain + ">");

  if (phish ? coin(rng, o.phishing_reply_to) : coin(rng, o.ham_reply_to)) {
    std::string rt = from_domain;
    if (phish && coin(rng, o.phishing_reply_to_mismatch)) rt = pick(rng, kBulkDomains);
    f.emplace_back("Reply-To", user + "@" + rt);
  }

  std::string to;
  for (int i = 0, n = uniform(rng, 1, 3); i < n; ++i) to += (i ? ", " : "") + pick(rng, kUsers) + "@" + kRecipientDomain;
  f.emplace_back("To", to);
  if (coin(rng, 0.3)) f.emplace_back("Cc", pick(rng, kUsers) + "@" + kRecipientDomain);
  f.emplace_back("Subject", "message " + token(rng, 6));
  f.emplace_back("MIME-Version", "1.0");
  f.emplace_back("Content-Type", coin(rng, 0.4) ? "text/html; charset=us-ascii" : "text/plain; charset=us-ascii");
  const std::size_t family = std::uniform_int_distribution<std::size_t>(0, std::max<std::size_t>(1, o.mailer_families) - 1)(rng);
  Rng templ(derive_seed(o.seed, 3, family));
  for (std::size_t i = 0; i < o.noise_fields; ++i) {
    const bool in_template = coin(templ, o.noise_probability);
    if (in_template != coin(rng, o.noise_flip)) f.emplace_back("X-Noise-" + two(static_cast<int>(i)), token(rng, 8));
  }

  std::string out;
  for (const auto& [name, value] : f) out += name + ": " + value + "\r\n";
  out += "\r\nsynthetic body\r\n";
  return out;
}

SynthLayout write_synthetic_corpus(const fs::path& dir, const SynthOptions& o) {
  SynthLayout layout{dir / "trec" / "full" / "index", dir / "trec" / "full", dir / "phishing"};
  fs::create_directories(layout.trec_root);
  fs::create_directories(dir / "trec" / "data");
  fs::create_directories(layout.phishing_dir);

  std::vector<Label> labels(o.ham, Label::Ham);
  labels.insert(labels.end(), o.spam, Label::Spam);
  Rng rng(o.seed);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::ofstream index(layout.trec_index, std::ios::binary);
  if (!index) throw IoError("cannot write " + layout.trec_index.string());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string name = "inmail." + std::to_string(i + 1);
    index << (labels[i] == Label::Ham ? "ham" : "spam") << " ../data/" << name << "\n";
    std::ofstream msg(dir / "trec" / "data" / name, std::ios::binary);
    if (!msg) throw IoError("cannot write " + name);
    msg << synth_email(labels[i], derive_seed(o.seed, 1, i), o);
  }

  const std::size_t per = std::max<std::size_t>(1, o.messages_per_mbox);
  for (std::size_t start = 0, file = 0; start < o.phishing; start += per, ++file) {
    const auto path = layout.phishing_dir / ("phishing-" + std::to_string(file) + ".mbox");
    std::ofstream mbox(path, std::ios::binary);
    if (!mbox) throw IoError("cannot write " + path.string());
    for (std::size_t i = start; i < std::min(o.phishing, start + per); ++i) {
      if (i > start) mbox << "\n";
      mbox << "From phisher@example Sat Apr 14 12:00:00 2007\n";
      std::string msg = synth_email(Label::Phishing, derive_seed(o.seed, 2, i), o);
      std::string lf;
      for (char c : msg)
        if (c != '\r') lf += c;
      mbox << lf;
    }
  }
  return layout;
}

}  // namespace emailad
