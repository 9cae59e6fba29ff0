/*
 * Copyright 2026 The Blindfair Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// blindfair: operator CLI for the two-party fair-training toolkit.
//
// Subcommands: dealer (offline triple generation), train / certify / verify
// (the secure protocols, loopback or networked), bench (cleartext optimizer
// sweeps). Every run writes a manifest.json with resolved flags, channel
// stats and wall-clock timing.
//
// Exit codes are a stable enumeration, one per error class; see
// exit_code_for below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "blindfair/boolgadget.hpp"
#include "blindfair/clearref.hpp"
#include "blindfair/dataio.hpp"
#include "blindfair/engine.hpp"
#include "blindfair/errors.hpp"
#include "blindfair/fairmpc.hpp"

namespace bf = blindfair;
using nlohmann::json;

namespace {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const bf::OverflowError*>(&e)) return 2;
  if (dynamic_cast<const bf::TripleExhausted*>(&e)) return 3;
  if (dynamic_cast<const bf::DimensionMismatch*>(&e)) return 4;
  if (dynamic_cast<const bf::ConfigMismatch*>(&e)) return 5;
  if (dynamic_cast<const bf::VersionMismatch*>(&e)) return 6;
  if (dynamic_cast<const bf::ChannelClosed*>(&e)) return 7;
  if (dynamic_cast<const bf::FrameTooLarge*>(&e)) return 8;
  if (dynamic_cast<const bf::UnknownTag*>(&e)) return 9;
  if (dynamic_cast<const bf::ConnectionRefused*>(&e)) return 10;
  if (dynamic_cast<const bf::HandshakeTimeout*>(&e)) return 11;
  if (dynamic_cast<const bf::ProtocolAbort*>(&e)) return 12;
  if (dynamic_cast<const bf::BlockSizeError*>(&e)) return 13;
  if (dynamic_cast<const bf::NonFiniteError*>(&e)) return 14;
  if (dynamic_cast<const bf::SingularProjection*>(&e)) return 15;
  if (dynamic_cast<const bf::BarrierDomainError*>(&e)) return 16;
  if (dynamic_cast<const bf::ParseError*>(&e)) return 17;
  if (dynamic_cast<const bf::NonBinaryColumn*>(&e)) return 18;
  if (dynamic_cast<const bf::EmptyDataset*>(&e)) return 19;
  if (dynamic_cast<const bf::NoCertificate*>(&e)) return 20;
  if (dynamic_cast<const bf::IntegrityError*>(&e)) return 21;
  if (dynamic_cast<const bf::IOError*>(&e)) return 22;
  return 1;
}

// --- Shared option bundles ---------------------------------------------------

struct DataOpts {
  std::string csv;
  std::string roles;
  std::string label_positive;
  std::size_t n = 1024;
  std::size_t n_test = 1024;
  double phi = 0.7853981633974483;  // pi/4
  std::size_t noise_features = 2;
};

struct ConnOpts {
  bool loopback = false;
  std::string role;  // "modeler" | "regulator"
  std::string listen;
  std::string connect;
  std::string triples;
  std::string mode = "prob";  // "exact" | "prob"
};

void add_data_flags(CLI::App* cmd, DataOpts* o) {
  cmd->add_option("--csv", o->csv, "CSV dataset (default: synthetic)");
  cmd->add_option("--roles", o->roles, "column-role sidecar for --csv");
  cmd->add_option("--label-positive", o->label_positive,
                  "label value mapped to y = 1");
  cmd->add_option("--n", o->n, "synthetic training size (power of two)");
  cmd->add_option("--n-test", o->n_test, "synthetic test size");
  cmd->add_option("--phi", o->phi, "synthetic rotation angle (radians)");
  cmd->add_option("--noise", o->noise_features, "synthetic noise features");
}

void add_conn_flags(CLI::App* cmd, ConnOpts* o) {
  cmd->add_flag("--loopback", o->loopback,
                "run both parties in-process over the loopback channel");
  cmd->add_option("--role", o->role, "modeler | regulator")
      ->check(CLI::IsMember({"modeler", "regulator"}));
  cmd->add_option("--listen", o->listen, "host:port to accept on");
  cmd->add_option("--connect", o->connect, "host:port to connect to");
  cmd->add_option("--triples", o->triples, "triple file for this party");
  cmd->add_option("--mode", o->mode, "truncation mode: exact | prob")
      ->check(CLI::IsMember({"exact", "prob"}));
}

std::uint64_t resolve_seed(std::uint64_t flag_seed) {
  if (const char* env = std::getenv("BLINDFAIR_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return flag_seed;
}

bf::SplitDataset make_data(const DataOpts& o, std::uint64_t seed) {
  if (!o.csv.empty()) {
    bf::DatasetSpec spec;
    spec.csv_path = o.csv;
    spec.seed = seed;
    spec.label_positive = o.label_positive;
    if (!o.roles.empty()) {
      bf::load_roles_file(o.roles, spec);
    }
    return bf::load_csv(spec);
  }
  bf::SyntheticSpec spec;
  spec.n = o.n;
  spec.n_test = o.n_test;
  spec.phi = o.phi;
  spec.noise_features = o.noise_features;
  spec.seed = seed;
  return bf::gen_synthetic(spec);
}

// Both parties derive the Z sharing from the public seed. This is a demo
// shortcut for the data-distribution step that precedes the protocols; the
// protocols themselves only ever touch one party's half.
std::pair<bf::SharedMatrix, bf::SharedMatrix> derive_z_shares(
    const bf::RingMatrix& Z, std::uint64_t seed) {
  bf::Prng rng(seed ^ 0x5a5a5a5a5a5a5a5aULL);
  bf::SharedMatrix s1(Z.rows, Z.cols), s2(Z.rows, Z.cols);
  for (std::size_t i = 0; i < Z.v.size(); ++i) {
    const bf::Ring r = rng();
    s2.v[i] = r;
    s1.v[i] = Z.v[i] - r;
  }
  return {s1, s2};
}

json stats_json(const bf::ChannelStats& s) {
  return json{{"frames_sent", s.frames_sent},
              {"bytes_sent", s.bytes_sent},
              {"rounds", s.rounds}};
}

void write_manifest(const std::string& out_dir, const json& manifest) {
  std::filesystem::create_directories(out_dir);
  std::ofstream f(out_dir + "/manifest.json");
  if (!f) {
    throw bf::IOError("cannot create " + out_dir + "/manifest.json");
  }
  f << manifest.dump(2) << "\n";
}

void write_theta(const std::string& path, const std::vector<bf::Ring>& theta) {
  const auto bytes = bf::serialize_ring_vector(theta);
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw bf::IOError("cannot create " + path);
  }
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

std::vector<bf::Ring> read_theta(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw bf::IOError("cannot open " + path);
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  if (bytes.empty() || bytes.size() % 8 != 0) {
    throw bf::IntegrityError("theta file " + path + " has bad size");
  }
  std::vector<bf::Ring> theta(bytes.size() / 8);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    theta[i] = bf::get_u64_le(bytes.data() + 8 * i);
  }
  return theta;
}

bf::TruncMode parse_mode(const std::string& s) {
  return s == "exact" ? bf::TruncMode::Exact : bf::TruncMode::Probabilistic;
}

// Builds a PartyContext; the private RNG is diversified per role.
bf::PartyContext make_ctx(bf::Role role, bf::Channel* ch, bf::TripleStore* ts,
                          std::uint64_t seed, bf::TruncMode mode) {
  bf::PartyContext ctx;
  ctx.role = role;
  ctx.channel = ch;
  ctx.triples = ts;
  ctx.fx = bf::FxConfig{};
  ctx.public_seed = seed;
  ctx.run_id = ts->run_id;
  ctx.mode = mode;
  ctx.private_rng.seed(seed * 2 + static_cast<std::uint64_t>(role));
  return ctx;
}

std::unique_ptr<bf::Channel> open_tcp(const ConnOpts& conn, bf::Role role) {
  const int r = role == bf::Role::Modeler ? 1 : 2;
  if (!conn.listen.empty()) {
    return bf::TcpChannel::accept(conn.listen, r);
  }
  if (!conn.connect.empty()) {
    return bf::TcpChannel::connect(conn.connect, r);
  }
  throw bf::ConnectionRefused("networked mode needs --listen or --connect");
}

std::vector<double> parse_c_list(const std::string& s) {
  std::vector<double> c;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto comma = s.find(',', pos);
    const std::string tok =
        s.substr(pos, comma == std::string::npos ? s.npos : comma - pos);
    c.push_back(std::strtod(tok.c_str(), nullptr));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (c.empty()) {
    throw bf::ParseError("empty constraint list");
  }
  return c;
}

// Feasibility of F <= 0 evaluated at fixed-point resolution, matching what
// certification computes on shares.
bool feasible_fx(const bf::Dataset& D, const std::vector<double>& theta,
                 const std::vector<double>& c, std::size_t block,
                 const bf::FxConfig& fx) {
  const bf::FxDataset fxd = bf::fx_quantize(D, fx);
  const bf::RingMatrix A = bf::constraint_matrix_fx(fxd, block, fx);
  for (std::size_t q = 0; q < A.rows; ++q) {
    bf::Ring raw = 0;
    for (std::size_t k = 0; k < A.cols; ++k) {
      raw += A.at(q, k) * bf::fx_encode(theta[k], fx);
    }
    const bf::Ring u = bf::rescale_round(raw, fx.frac_bits);
    const std::int64_t absu = std::llabs(bf::to_signed(u));
    const std::int64_t F = absu - bf::to_signed(bf::fx_encode(c[q], fx));
    if (F > 0) return false;
  }
  return true;
}

// --- dealer ------------------------------------------------------------------

int cmd_dealer(const std::string& out_prefix, std::uint64_t seed,
               std::size_t scalar, std::size_t and_count,
               const std::vector<std::string>& shape_specs,
               const std::string& budget_kind, std::size_t n, std::size_t d,
               std::size_t p, int batch_exp, std::size_t epochs,
               std::size_t block, const std::string& out_dir) {
  bf::TripleBudget budget;
  budget.scalar = scalar;
  budget.and_bits = and_count;
  for (const auto& spec : shape_specs) {
    std::size_t sn, sk, sm, count;
    if (std::sscanf(spec.c_str(), "%zu,%zu,%zu=%zu", &sn, &sk, &sm, &count) !=
        4) {
      throw bf::ParseError("bad --shape '" + spec + "', want n,k,m=count");
    }
    budget.add_matrix(sn, sk, sm, count);
  }
  if (budget_kind == "train") {
    budget += bf::train_triple_budget(n, d, p, batch_exp, epochs, block);
  } else if (budget_kind == "certify") {
    budget += bf::certify_triple_budget(n, d, p, block);
  } else if (budget_kind == "verify") {
    budget += bf::verify_triple_budget(d);
  } else if (!budget_kind.empty()) {
    throw bf::ParseError("unknown --budget '" + budget_kind + "'");
  }

  auto [s1, s2] = bf::dealer_generate(budget.scalar, budget.and_bits,
                                      budget.matrix, seed);
  s1.save(out_prefix + ".p1");
  s2.save(out_prefix + ".p2");

  json mat = json::array();
  for (const auto& [shape, count] : budget.matrix) {
    mat.push_back(json{{"n", std::get<0>(shape)},
                       {"k", std::get<1>(shape)},
                       {"m", std::get<2>(shape)},
                       {"count", count}});
  }
  std::printf("dealer: %zu scalar, %zu AND, %zu matrix shapes -> %s.p{1,2}\n",
              budget.scalar, budget.and_bits, budget.matrix.size(),
              out_prefix.c_str());
  if (!out_dir.empty()) {
    write_manifest(out_dir, json{{"subcommand", "dealer"},
                                 {"seed", seed},
                                 {"scalar", budget.scalar},
                                 {"and", budget.and_bits},
                                 {"matrix", mat},
                                 {"out_prefix", out_prefix}});
  }
  return 0;
}

// --- train -------------------------------------------------------------------

struct ProtoResult {
  std::optional<std::vector<bf::Ring>> theta;
  bf::ChannelStats stats;
  double wall_ms = 0.0;
};

ProtoResult run_train_party(bf::PartyContext& ctx, const bf::TrainInputs& in,
                            const bf::TrainingConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ProtoResult r;
  r.theta = bf::protocol_train(ctx, in, cfg);
  r.stats = ctx.channel->stats();
  r.wall_ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  return r;
}

int cmd_train(const DataOpts& data, const ConnOpts& conn,
              std::uint64_t flag_seed, const std::string& c_list,
              double eta_theta, double eta_lambda, int batch_exp,
              std::size_t epochs, std::size_t block,
              const std::string& out_dir) {
  const std::uint64_t seed = resolve_seed(flag_seed);
  const bf::TruncMode mode = parse_mode(conn.mode);
  const bf::FxConfig fx;

  bf::SplitDataset split = make_data(data, seed);
  const bf::FxDataset fxd = bf::fx_quantize(split.train, fx);
  const std::size_t n = split.train.n(), d = split.train.d(),
                    p = split.train.p();

  bf::TrainingConfig cfg;
  cfg.eta_theta = eta_theta;
  cfg.eta_lambda = eta_lambda;
  cfg.batch_exp = batch_exp;
  cfg.epochs = epochs;
  cfg.block = block;
  cfg.seed = seed;
  cfg.c = parse_c_list(c_list);
  if (cfg.c.size() == 1 && p > 1) {
    cfg.c.assign(p, cfg.c[0]);
  }

  const auto [zs1, zs2] = derive_z_shares(fxd.Z, seed);

  bf::TrainInputs in_m, in_r;
  in_m.X = fxd.X;
  in_m.y = fxd.y;
  in_m.Z_share = zs1;
  in_m.n = in_r.n = n;
  in_m.d = in_r.d = d;
  in_m.p = in_r.p = p;
  in_r.Z_share = zs2;

  const auto resolved_epochs = cfg.resolved_epochs(n);
  ProtoResult res;
  if (conn.loopback) {
    const auto budget = bf::train_triple_budget(n, d, p, batch_exp,
                                                resolved_epochs, block);
    auto [ts1, ts2] = bf::dealer_generate(budget.scalar, budget.and_bits,
                                          budget.matrix, seed ^ 0xdea1e4);
    auto [ch1, ch2] = bf::InProcChannel::create_pair();
    auto ctx1 = make_ctx(bf::Role::Modeler, ch1.get(), &ts1, seed, mode);
    auto ctx2 = make_ctx(bf::Role::Regulator, ch2.get(), &ts2, seed, mode);
    ProtoResult reg;
    std::thread t([&] { reg = run_train_party(ctx2, in_r, cfg); });
    res = run_train_party(ctx1, in_m, cfg);
    t.join();
  } else {
    const bf::Role role =
        conn.role == "regulator" ? bf::Role::Regulator : bf::Role::Modeler;
    if (conn.triples.empty()) {
      throw bf::IOError("networked mode needs --triples");
    }
    bf::TripleStore ts = bf::TripleStore::load(conn.triples);
    auto ch = open_tcp(conn, role);
    auto ctx = make_ctx(role, ch.get(), &ts, seed, mode);
    res = run_train_party(ctx, role == bf::Role::Modeler ? in_m : in_r, cfg);
  }

  std::filesystem::create_directories(out_dir);
  json manifest{{"subcommand", "train"},
                {"seed", seed},
                {"mode", conn.mode},
                {"n", n},
                {"d", d},
                {"p", p},
                {"batch_exp", batch_exp},
                {"epochs", resolved_epochs},
                {"block", block},
                {"eta_theta", eta_theta},
                {"eta_lambda", eta_lambda},
                {"c", cfg.c},
                {"channel", stats_json(res.stats)},
                {"wall_ms", res.wall_ms}};
  if (res.theta) {
    write_theta(out_dir + "/theta.bin", *res.theta);
    std::vector<double> dec(res.theta->size());
    for (std::size_t i = 0; i < dec.size(); ++i) {
      dec[i] = bf::fx_decode((*res.theta)[i], fx);
    }
    manifest["theta"] = dec;
    manifest["theta_path"] = out_dir + "/theta.bin";
    const auto rep = bf::evaluate(split.test, dec);
    manifest["test_accuracy"] = rep.accuracy;
    std::printf("train: theta written, test accuracy %.4f\n", rep.accuracy);
  } else {
    std::printf("train: done (regulator holds no model)\n");
  }
  write_manifest(out_dir, manifest);
  return 0;
}

// --- certify -----------------------------------------------------------------

int cmd_certify(const DataOpts& data, const ConnOpts& conn,
                std::uint64_t flag_seed, const std::string& c_list,
                std::size_t block, const std::string& theta_in,
                const std::string& cert_out, const std::string& out_dir) {
  const std::uint64_t seed = resolve_seed(flag_seed);
  const bf::TruncMode mode = parse_mode(conn.mode);
  const bf::FxConfig fx;

  bf::SplitDataset split = make_data(data, seed);
  const bf::FxDataset fxd = bf::fx_quantize(split.train, fx);
  const std::size_t n = split.train.n(), d = split.train.d(),
                    p = split.train.p();

  auto c_float = parse_c_list(c_list);
  if (c_float.size() == 1 && p > 1) c_float.assign(p, c_float[0]);
  std::vector<bf::Ring> c_ring(p);
  for (std::size_t q = 0; q < p; ++q) c_ring[q] = bf::fx_encode(c_float[q], fx);

  const auto [zs1, zs2] = derive_z_shares(fxd.Z, seed ^ 0xce47);

  bf::CertifyInputs in_m, in_r;
  in_m.Z_share = zs1;
  in_r.Z_share = zs2;
  in_m.n = in_r.n = n;
  in_m.d = in_r.d = d;
  in_m.p = in_r.p = p;
  in_m.block = in_r.block = block;
  in_m.c = in_r.c = c_ring;
  in_m.whitening = in_r.whitening = split.whitening;
  in_m.theta = read_theta(theta_in);
  in_r.X = fxd.X;

  const auto t0 = std::chrono::steady_clock::now();
  bf::Certificate cert;
  bf::ChannelStats stats;
  if (conn.loopback) {
    const auto budget = bf::certify_triple_budget(n, d, p, block);
    auto [ts1, ts2] = bf::dealer_generate(budget.scalar, budget.and_bits,
                                          budget.matrix, seed ^ 0xce47dea1);
    auto [ch1, ch2] = bf::InProcChannel::create_pair();
    auto ctx1 = make_ctx(bf::Role::Modeler, ch1.get(), &ts1, seed, mode);
    auto ctx2 = make_ctx(bf::Role::Regulator, ch2.get(), &ts2, seed, mode);
    bf::Certificate reg_cert;
    std::thread t([&] { reg_cert = bf::protocol_certify(ctx2, in_r); });
    cert = bf::protocol_certify(ctx1, in_m);
    t.join();
    stats = ctx1.channel->stats();
  } else {
    const bf::Role role =
        conn.role == "regulator" ? bf::Role::Regulator : bf::Role::Modeler;
    if (conn.triples.empty()) {
      throw bf::IOError("networked mode needs --triples");
    }
    bf::TripleStore ts = bf::TripleStore::load(conn.triples);
    auto ch = open_tcp(conn, role);
    auto ctx = make_ctx(role, ch.get(), &ts, seed, mode);
    cert = bf::protocol_certify(ctx, role == bf::Role::Modeler ? in_m : in_r);
    stats = ctx.channel->stats();
  }
  const double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

  if (!cert_out.empty()) {
    cert.save(cert_out);
  }
  std::printf("certify: %s (%.1f ms)\n", cert.pass ? "pass" : "fail", wall_ms);
  write_manifest(out_dir, json{{"subcommand", "certify"},
                               {"seed", seed},
                               {"mode", conn.mode},
                               {"n", n},
                               {"d", d},
                               {"p", p},
                               {"c", c_float},
                               {"verdict", cert.pass ? "pass" : "fail"},
                               {"cert_path", cert_out},
                               {"channel", stats_json(stats)},
                               {"wall_ms", wall_ms}});
  return 0;
}

// --- verify ------------------------------------------------------------------

int cmd_verify(const DataOpts& data, const ConnOpts& conn,
               std::uint64_t flag_seed, const std::string& theta_in,
               const std::string& cert_in, std::size_t x_index,
               const std::string& out_dir) {
  const std::uint64_t seed = resolve_seed(flag_seed);
  const bf::TruncMode mode = parse_mode(conn.mode);
  const bf::FxConfig fx;

  bf::SplitDataset split = make_data(data, seed);
  const std::size_t d = split.train.d();
  if (x_index >= split.test.n()) {
    throw bf::DimensionMismatch("--x-index beyond test set");
  }
  std::vector<bf::Ring> x_ring(d);
  for (std::size_t k = 0; k < d; ++k) {
    x_ring[k] = bf::fx_encode(split.test.X.at(x_index, k), fx);
  }

  bf::VerifyInputs in_m, in_r;
  in_m.d = in_r.d = d;
  in_m.theta = read_theta(theta_in);
  in_r.certificate = bf::Certificate::load(cert_in);
  in_r.x = x_ring;

  const auto t0 = std::chrono::steady_clock::now();
  bf::VerificationResult res;
  bf::ChannelStats stats;
  if (conn.loopback) {
    const auto budget = bf::verify_triple_budget(d);
    auto [ts1, ts2] = bf::dealer_generate(budget.scalar, budget.and_bits,
                                          budget.matrix, seed ^ 0x7e41f);
    auto [ch1, ch2] = bf::InProcChannel::create_pair();
    auto ctx1 = make_ctx(bf::Role::Modeler, ch1.get(), &ts1, seed, mode);
    auto ctx2 = make_ctx(bf::Role::Regulator, ch2.get(), &ts2, seed, mode);
    bf::VerificationResult mres;
    std::thread t([&] { mres = bf::protocol_verify(ctx1, in_m); });
    res = bf::protocol_verify(ctx2, in_r);
    t.join();
    stats = ctx2.channel->stats();
  } else {
    const bf::Role role =
        conn.role == "regulator" ? bf::Role::Regulator : bf::Role::Modeler;
    if (conn.triples.empty()) {
      throw bf::IOError("networked mode needs --triples");
    }
    bf::TripleStore ts = bf::TripleStore::load(conn.triples);
    auto ch = open_tcp(conn, role);
    auto ctx = make_ctx(role, ch.get(), &ts, seed, mode);
    res = bf::protocol_verify(ctx, role == bf::Role::Modeler ? in_m : in_r);
    stats = ctx.channel->stats();
  }
  const double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

  json manifest{{"subcommand", "verify"},
                {"seed", seed},
                {"signature_match", res.signature_match},
                {"channel", stats_json(stats)},
                {"wall_ms", wall_ms}};
  if (res.prediction) {
    manifest["prediction"] = *res.prediction;
  }
  write_manifest(out_dir, manifest);
  std::printf("verify: signature %s%s\n",
              res.signature_match ? "match" : "MISMATCH",
              res.prediction ? (*res.prediction ? ", prediction 1"
                                                : ", prediction 0")
                             : "");
  return res.signature_match ? 0 : 21;
}

// --- bench -------------------------------------------------------------------

int cmd_bench(const DataOpts& data, std::uint64_t flag_seed,
              const std::string& optimizers, double sweep_lo, double sweep_hi,
              std::size_t sweep_steps, int batch_exp, std::size_t epochs,
              std::size_t block, const std::string& out_dir) {
  const std::uint64_t seed = resolve_seed(flag_seed);
  const bf::FxConfig fx;
  bf::SplitDataset split = make_data(data, seed);
  const std::size_t p = split.train.p();

  std::vector<std::string> opts;
  {
    std::size_t pos = 0;
    std::string src = optimizers == "all" ? "lagrange,projected,iplb"
                                          : optimizers;
    while (pos < src.size()) {
      const auto comma = src.find(',', pos);
      opts.push_back(
          src.substr(pos, comma == std::string::npos ? src.npos : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }

  std::vector<double> sweep(sweep_steps);
  for (std::size_t i = 0; i < sweep_steps; ++i) {
    const double f = sweep_steps == 1
                         ? 0.0
                         : static_cast<double>(i) /
                               static_cast<double>(sweep_steps - 1);
    sweep[i] = sweep_hi * std::pow(sweep_lo / sweep_hi, f);
  }

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir + "/sweep.csv");
  csv << "optimizer,arithmetic,sigmoid,c,status,accuracy,rate_z0,rate_z1,"
         "rate_gap,p_percent,feasible_fx,theta_norm\n";

  auto emit = [&](const std::string& opt, const std::string& arith,
                  const std::string& sig, double c,
                  const std::vector<double>& theta) {
    const auto rep = bf::evaluate(split.test, theta);
    const auto& gm = rep.groups[0];
    double norm = 0.0;
    for (double v : theta) norm += v * v;
    const bool feas = feasible_fx(split.train, theta,
                                  std::vector<double>(p, c), block, fx);
    csv << opt << ',' << arith << ',' << sig << ',' << c << ",ok,"
        << rep.accuracy << ',' << gm.rate_z0 << ',' << gm.rate_z1 << ','
        << gm.ar_gap.value_or(-1.0) << ',' << gm.p_percent.value_or(-1.0)
        << ',' << (feas ? 1 : 0) << ',' << std::sqrt(norm) << '\n';
  };
  for (const auto& opt : opts) {
    for (std::size_t ci = 0; ci < sweep.size(); ++ci) {
      const double c = sweep[ci];
      bf::TrainingConfig cfg;
      cfg.batch_exp = batch_exp;
      cfg.epochs = epochs;
      cfg.block = block;
      cfg.seed = seed;
      cfg.c.assign(p, c);
      const std::string tag =
          opt + "_" + std::to_string(ci);
      try {
        if (opt == "lagrange") {
          cfg.optimizer = bf::Optimizer::Lagrange;
          cfg.sigmoid = bf::SigmoidKind::Exact;
          const auto fl = bf::train_lagrange(split.train, cfg);
          emit(opt, "float", "exact", c, fl.params.theta);
          bf::write_trace_csv(out_dir + "/trace_" + tag + "_float.csv",
                              fl.trace);

          const auto fxd = bf::fx_quantize(split.train, fx);
          const auto fr = bf::train_lagrange_fx(fxd, cfg, fx);
          std::vector<double> dec(fr.params.theta.size());
          for (std::size_t k = 0; k < dec.size(); ++k) {
            dec[k] = bf::fx_decode(fr.params.theta[k], fx);
          }
          emit(opt, "fixed", "piecewise", c, dec);
          bf::write_trace_csv(out_dir + "/trace_" + tag + "_fixed.csv",
                              fr.trace);
        } else if (opt == "projected") {
          cfg.optimizer = bf::Optimizer::Projected;
          cfg.sigmoid = bf::SigmoidKind::Exact;
          const auto fl = bf::train_projected(split.train, cfg);
          emit(opt, "float", "exact", c, fl.params.theta);
        } else if (opt == "iplb") {
          cfg.optimizer = bf::Optimizer::Iplb;
          cfg.sigmoid = bf::SigmoidKind::Exact;
          const auto fl = bf::train_iplb(split.train, cfg);
          emit(opt, "float", "exact", c, fl.params.theta);
        } else {
          throw bf::ParseError("unknown optimizer '" + opt + "'");
        }
      } catch (const bf::BarrierDomainError&) {
        csv << opt << ",float,exact," << c << ",failed:BarrierDomainError"
            << ",,,,,,,\n";
      } catch (const bf::SingularProjection&) {
        csv << opt << ",float,exact," << c << ",failed:SingularProjection"
            << ",,,,,,,\n";
      } catch (const bf::NonFiniteError&) {
        csv << opt << ",float,exact," << c << ",failed:NonFiniteError"
            << ",,,,,,,\n";
      }
    }
  }
  csv.close();
  write_manifest(out_dir, json{{"subcommand", "bench"},
                               {"seed", seed},
                               {"optimizers", optimizers},
                               {"sweep_lo", sweep_lo},
                               {"sweep_hi", sweep_hi},
                               {"sweep_steps", sweep_steps},
                               {"epochs", epochs},
                               {"csv", out_dir + "/sweep.csv"}});
  std::printf("bench: wrote %s/sweep.csv\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blindfair: two-party fair logistic regression toolkit"};
  app.require_subcommand(1);

  // dealer
  auto* dealer = app.add_subcommand("dealer", "generate triple files");
  std::string d_prefix = "triples";
  std::uint64_t d_seed = 1;
  std::size_t d_scalar = 0, d_and = 0;
  std::vector<std::string> d_shapes;
  std::string d_budget;
  std::size_t d_n = 1024, d_d = 4, d_p = 1, d_epochs = 0, d_block = 64;
  int d_batch_exp = 6;
  std::string d_out;
  dealer->add_option("--out-prefix", d_prefix, "output path prefix");
  dealer->add_option("--seed", d_seed, "dealer seed");
  dealer->add_option("--scalar", d_scalar, "extra scalar triples");
  dealer->add_option("--and", d_and, "extra AND triples");
  dealer->add_option("--shape", d_shapes, "matrix triples n,k,m=count");
  dealer->add_option("--budget", d_budget,
                     "add a protocol budget: train | certify | verify");
  dealer->add_option("--n", d_n, "budget: training examples");
  dealer->add_option("--d", d_d, "budget: features");
  dealer->add_option("--p", d_p, "budget: sensitive columns");
  dealer->add_option("--batch-exp", d_batch_exp, "budget: log2 batch size");
  dealer->add_option("--epochs", d_epochs, "budget: epochs (0 = auto)");
  dealer->add_option("--block", d_block, "budget: block size");
  dealer->add_option("--out", d_out, "manifest directory");

  // train
  auto* train = app.add_subcommand("train", "secure fair training");
  DataOpts t_data;
  ConnOpts t_conn;
  std::uint64_t t_seed = 1;
  std::string t_c = "0.01";
  double t_eta_theta = 1e-4, t_eta_lambda = 0.05;
  int t_batch_exp = 6;
  std::size_t t_epochs = 0, t_block = 64;
  std::string t_out = "out/train";
  add_data_flags(train, &t_data);
  add_conn_flags(train, &t_conn);
  train->add_option("--seed", t_seed, "public seed");
  train->add_option("--c", t_c, "constraint bound(s), comma separated");
  train->add_option("--eta-theta", t_eta_theta, "theta learning rate");
  train->add_option("--eta-lambda", t_eta_lambda, "lambda learning rate");
  train->add_option("--batch-exp", t_batch_exp, "log2 minibatch size");
  train->add_option("--epochs", t_epochs, "epochs (0 = ~15000 updates)");
  train->add_option("--block", t_block, "block size");
  train->add_option("--out", t_out, "output directory");

  // certify
  auto* certify = app.add_subcommand("certify", "fairness certification");
  DataOpts c_data;
  ConnOpts c_conn;
  std::uint64_t c_seed = 1;
  std::string c_c = "0.01", c_theta = "out/train/theta.bin";
  std::string c_cert = "out/certify/cert.bin", c_out = "out/certify";
  std::size_t c_block = 64;
  add_data_flags(certify, &c_data);
  add_conn_flags(certify, &c_conn);
  certify->add_option("--seed", c_seed, "public seed");
  certify->add_option("--c", c_c, "constraint bound(s)");
  certify->add_option("--block", c_block, "block size");
  certify->add_option("--theta-in", c_theta, "model file (Modeler)");
  certify->add_option("--cert-out", c_cert, "certificate output path");
  certify->add_option("--out", c_out, "output directory");

  // verify
  auto* verify = app.add_subcommand("verify", "decision verification");
  DataOpts v_data;
  ConnOpts v_conn;
  std::uint64_t v_seed = 1;
  std::string v_theta = "out/train/theta.bin";
  std::string v_cert = "out/certify/cert.bin", v_out = "out/verify";
  std::size_t v_index = 0;
  add_data_flags(verify, &v_data);
  add_conn_flags(verify, &v_conn);
  verify->add_option("--seed", v_seed, "public seed");
  verify->add_option("--theta-in", v_theta, "model file (Modeler)");
  verify->add_option("--cert-in", v_cert, "certificate path (Regulator)");
  verify->add_option("--x-index", v_index, "test-set row to classify");
  verify->add_option("--out", v_out, "output directory");

  // bench
  auto* bench = app.add_subcommand("bench", "cleartext optimizer sweeps");
  DataOpts b_data;
  std::uint64_t b_seed = 1;
  std::string b_opt = "all";
  std::vector<double> b_sweep{1e-4, 1.0};
  std::size_t b_steps = 10, b_epochs = 0, b_block = 64;
  int b_batch_exp = 6;
  std::string b_out = "out/bench";
  add_data_flags(bench, &b_data);
  bench->add_option("--seed", b_seed, "seed");
  bench->add_option("--optimizer", b_opt,
                    "lagrange | projected | iplb | all (comma list)");
  bench->add_option("--sweep-c", b_sweep, "constraint sweep: lo hi")
      ->expected(2);
  bench->add_option("--sweep-steps", b_steps, "log-spaced sweep points");
  bench->add_option("--batch-exp", b_batch_exp, "log2 minibatch size");
  bench->add_option("--epochs", b_epochs, "epochs (0 = ~15000 updates)");
  bench->add_option("--block", b_block, "block size");
  bench->add_option("--out", b_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dealer->parsed()) {
      return cmd_dealer(d_prefix, resolve_seed(d_seed), d_scalar, d_and,
                        d_shapes, d_budget, d_n, d_d, d_p, d_batch_exp,
                        d_epochs == 0 && d_budget == "train"
                            ? bf::TrainingConfig{}.resolved_epochs(d_n)
                            : d_epochs,
                        d_block, d_out);
    }
    if (train->parsed()) {
      return cmd_train(t_data, t_conn, t_seed, t_c, t_eta_theta, t_eta_lambda,
                       t_batch_exp, t_epochs, t_block, t_out);
    }
    if (certify->parsed()) {
      return cmd_certify(c_data, c_conn, c_seed, c_c, c_block, c_theta,
                         c_cert, c_out);
    }
    if (verify->parsed()) {
      return cmd_verify(v_data, v_conn, v_seed, v_theta, v_cert, v_index,
                        v_out);
    }
    if (bench->parsed()) {
      return cmd_bench(b_data, b_seed, b_opt, b_sweep[0], b_sweep[1], b_steps,
                       b_batch_exp, b_epochs, b_block, b_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return 0;
}
