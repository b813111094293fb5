// Copyright 2026 The qtoksim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.h"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "qtoksim/format.h"
#include "qtoksim/harness/scenario.h"
#include "qtoksim/noise.h"
#include "qtoksim/ops.h"
#include "qtoksim/qrpuf.h"
#include "qtoksim/rng.h"

namespace qtoksim::cli {

namespace {

using nlohmann::ordered_json;

double parse_number(std::string_view text, std::string_view what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw UsageError("invalid number '" + std::string(text) + "' in " + std::string(what));
    }
    return v;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Output files are collected first and written only after the command has
/// fully succeeded.
class Outputs {
   public:
    void add(const std::string &path, std::string content) {
        if (!path.empty()) {
            files_.emplace_back(path, std::move(content));
        }
    }

    void commit() const {
        for (const auto &[path, content] : files_) {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out) {
                throw std::runtime_error("cannot write '" + path + "'");
            }
            out << content;
            if (!out) {
                throw std::runtime_error("failed writing '" + path + "'");
            }
        }
    }

   private:
    std::vector<std::pair<std::string, std::string>> files_;
};

void require_positive(size_t v, const char *flag) {
    if (v == 0) {
        throw UsageError(std::string(flag) + " must be positive");
    }
}

void print_summary(std::ostream &out, const harness::ScenarioConfig &cfg, const harness::Metrics &m) {
    out << "protocol=" << harness::to_string(cfg.protocol) << " adversary=" << harness::to_string(cfg.adversary)
        << " trials=" << m.trials << " accepts=" << m.accepts << " lost=" << m.lost
        << " accept_rate=" << format_double(m.accept_rate) << " seed=" << cfg.seed << "\n";
}

}  // namespace

std::vector<double> parse_grid(std::string_view text) {
    std::vector<std::string_view> parts;
    size_t start = 0;
    while (true) {
        size_t colon = text.find(':', start);
        parts.push_back(text.substr(start, colon - start));
        if (colon == std::string_view::npos) {
            break;
        }
        start = colon + 1;
    }
    if (parts.size() == 1) {
        return {parse_number(parts[0], "grid")};
    }
    if (parts.size() != 3) {
        throw UsageError("grid must be start:stop:step");
    }
    const double lo = parse_number(parts[0], "grid");
    const double hi = parse_number(parts[1], "grid");
    const double step = parse_number(parts[2], "grid");
    if (!(step > 0.0)) {
        throw UsageError("grid step must be positive");
    }
    if (hi < lo) {
        throw UsageError("grid stop must not be below start");
    }
    const auto count = static_cast<size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> grid;
    grid.reserve(count);
    for (size_t i = 0; i < count; i++) {
        // Snap to 12 significant decimals so 0:0.3:0.05 prints 0.15, not 0.15000000000000002.
        const double v = lo + static_cast<double>(i) * step;
        const double scale = std::pow(10.0, 11 - std::floor(std::log10(std::max(std::abs(v), 1e-300))));
        grid.push_back(v == 0.0 ? 0.0 : std::round(v * scale) / scale);
    }
    return grid;
}

uint64_t resolve_seed(std::optional<uint64_t> flag) {
    if (flag) {
        return *flag;
    }
    const char *env = std::getenv("QTOKSIM_SEED");
    if (env == nullptr || *env == '\0') {
        return 0;
    }
    std::string_view text(env);
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw UsageError("QTOKSIM_SEED must be an unsigned 64-bit integer");
    }
    return v;
}

std::vector<DephasingRow> dephasing_curve(double t2_us, double t_max_us, size_t points, size_t shots,
                                          uint64_t seed) {
    if (!(t2_us > 0.0) || !(t_max_us > 0.0)) {
        throw UsageError("T2 and t-max must be positive");
    }
    if (points < 2) {
        throw UsageError("a curve needs at least 2 points");
    }
    require_positive(shots, "--shots");
    const StateVector plus = StateVector::normalized(Eigen::Vector2cd(1.0, 1.0));
    std::vector<DephasingRow> rows;
    rows.reserve(points);
    for (size_t i = 0; i < points; i++) {
        const double t = t_max_us * static_cast<double>(i) / static_cast<double>(points - 1);
        RngStream rng = RngStream(seed, 0).child(i);
        DensityMatrix rho = dephase(DensityMatrix::from_pure(plus), t, t2_us);
        // Population of |-> after rotating the X basis onto Z.
        const double p_minus = apply_unitary(UnitaryOp::hadamard(), rho).population(1);
        size_t flips = 0;
        for (size_t s = 0; s < shots; s++) {
            flips += rng.bernoulli(p_minus) ? 1 : 0;
        }
        rows.push_back(DephasingRow{t, static_cast<double>(flips) / static_cast<double>(shots),
                                    dephasing_flip_probability(t, t2_us)});
    }
    return rows;
}

std::string dephasing_csv(const std::vector<DephasingRow> &rows) {
    std::ostringstream out;
    out << "t_us,flip_rate,analytic_p\n";
    for (const auto &r : rows) {
        out << format_double(r.t_us) << ',' << format_double(r.flip_rate) << ',' << format_double(r.analytic_p)
            << '\n';
    }
    return out.str();
}

std::vector<uupuf::EstimatorReport> epsilon_sweep(size_t lambda, const std::vector<double> &epsilons,
                                                  Estimator estimator, double delta, size_t trials,
                                                  uint64_t seed) {
    if (lambda == 0 || lambda > uupuf::kMaxLambda) {
        throw UsageError("--lambda must lie in [1, " + std::to_string(uupuf::kMaxLambda) + "]");
    }
    require_positive(trials, "--trials");
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw UsageError("--delta must lie in [0, 1]");
    }
    for (double e : epsilons) {
        if (!(e >= 0.0 && e <= 1.0)) {
            throw UsageError("epsilon values must lie in [0, 1]");
        }
    }
    RngStream device_rng(seed, 1);
    const auto puf = uupuf::qgen_uu(lambda, device_rng);
    std::vector<uupuf::EstimatorReport> rows;
    for (double eps : epsilons) {
        uupuf::PerturbedPuf perturbed(puf, eps);
        RngStream rng(seed, 0);
        auto channel = uupuf::as_channel(perturbed);
        double rate = estimator == Estimator::collision
                          ? uupuf::estimate_collision_resistance(channel, puf.dim(), delta, trials, rng)
                          : uupuf::estimate_robustness(channel, puf.dim(), delta, trials, rng);
        rows.push_back(uupuf::EstimatorReport{lambda, eps, delta, trials, rate, seed});
    }
    return rows;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Simulator for quantum PUF and quantum token authentication protocols", "qtoksim"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand all help");

    std::optional<uint64_t> seed_flag;
    auto add_seed = [&](CLI::App *cmd) {
        cmd->add_option("--seed", seed_flag, "Random seed (default: QTOKSIM_SEED, then 0)");
    };
    std::function<void(Outputs &)> action;

    // qrpuf-enroll
    struct {
        size_t lambda = 4;
        size_t challenges = 8;
        std::string mode = "analytic";
        size_t shots = 3000;
        unsigned bits = qrpuf::kDefaultShifterBits;
        std::string out;
        std::string puf_out;
    } enroll;
    auto *c_enroll = app.add_subcommand("qrpuf-enroll", "Generate a QR-PUF and enroll its challenge-response table");
    c_enroll->add_option("--lambda", enroll.lambda, "Qubits per challenge")->required();
    c_enroll->add_option("--challenges", enroll.challenges, "Number of CRT entries");
    c_enroll->add_option("--mode", enroll.mode, "analytic or tomography");
    c_enroll->add_option("--shots", enroll.shots, "Tomography shots per qubit");
    c_enroll->add_option("--bits", enroll.bits, "Shifter quantization bits");
    c_enroll->add_option("--out", enroll.out, "CRT JSON output")->required();
    c_enroll->add_option("--puf-out", enroll.puf_out, "PUF JSON output");
    add_seed(c_enroll);
    c_enroll->callback([&] {
        action = [&](Outputs &files) {
            const uint64_t seed = resolve_seed(seed_flag);
            require_positive(enroll.lambda, "--lambda");
            require_positive(enroll.challenges, "--challenges");
            qrpuf::EnrollMode mode;
            try {
                mode = qrpuf::parse_enroll_mode(enroll.mode);
            } catch (const std::invalid_argument &e) {
                throw UsageError(e.what());
            }
            if (enroll.bits == 0 || enroll.bits > 24) {
                throw UsageError("--bits must lie in [1, 24]");
            }
            if (mode == qrpuf::EnrollMode::tomography && enroll.shots < 3) {
                throw UsageError("--shots must be at least 3 for tomography");
            }
            RngStream rng(seed, 0);
            auto puf = qrpuf::qgen_qr(enroll.lambda, rng);
            auto challenges = qrpuf::select_challenges(enroll.challenges, enroll.lambda, rng);
            auto crt = qrpuf::enroll(puf, challenges, mode, enroll.shots, enroll.bits, rng);
            files.add(enroll.out, qrpuf::crt_to_json(crt) + "\n");
            files.add(enroll.puf_out, qrpuf::puf_to_json(puf) + "\n");
            out << "enrolled lambda=" << enroll.lambda << " entries=" << crt.entries.size()
                << " mode=" << qrpuf::to_string(mode) << " seed=" << seed << "\n";
        };
    });

    // qrpuf-verify
    struct {
        std::string crt;
        std::string puf;
        size_t threshold = 0;
        size_t shots = 1;
        double readout_flip = 0.0;
        std::string out;
    } verify;
    auto *c_verify = app.add_subcommand("qrpuf-verify", "Verify an honest QR-PUF holder against every CRT entry");
    c_verify->add_option("--crt", verify.crt, "CRT JSON")->required();
    c_verify->add_option("--puf", verify.puf, "PUF JSON")->required();
    c_verify->add_option("--threshold", verify.threshold, "Hamming threshold");
    c_verify->add_option("--shots", verify.shots, "Queries per qubit (majority vote)");
    c_verify->add_option("--readout-flip", verify.readout_flip, "Readout flip probability");
    c_verify->add_option("--out", verify.out, "Report JSON output");
    add_seed(c_verify);
    c_verify->callback([&] {
        action = [&](Outputs &files) {
            const uint64_t seed = resolve_seed(seed_flag);
            require_positive(verify.shots, "--shots");
            if (!(verify.readout_flip >= 0.0 && verify.readout_flip <= 1.0)) {
                throw UsageError("--readout-flip must lie in [0, 1]");
            }
            qrpuf::ChallengeResponseTable crt;
            std::optional<qrpuf::QrPuf> loaded;
            try {
                crt = qrpuf::crt_from_json(read_file(verify.crt));
                loaded = qrpuf::puf_from_json(read_file(verify.puf));
            } catch (const UsageError &) {
                throw;
            } catch (const std::exception &e) {
                throw UsageError(e.what());
            }
            const qrpuf::QrPuf &puf = *loaded;
            if (puf.lambda() != crt.lambda) {
                throw UsageError("PUF and CRT disagree on lambda");
            }
            qrpuf::VerifyOptions opts;
            opts.hamming_threshold = verify.threshold;
            opts.shots_per_qubit = verify.shots;
            opts.readout_flip_prob = verify.readout_flip;
            auto responder = qrpuf::honest_responder(puf);
            RngStream rng(seed, 0);
            ordered_json entries = ordered_json::array();
            size_t accepts = 0;
            for (size_t i = 0; i < crt.entries.size(); i++) {
                auto r = qrpuf::verify(crt, i, responder, opts, rng);
                accepts += r.accept ? 1 : 0;
                entries.push_back({{"index", crt.entries[i].challenge.index},
                                   {"accept", r.accept},
                                   {"hamming_weight", r.hamming_weight},
                                   {"observed_o", r.observed_o.str()}});
            }
            ordered_json report{{"entries", entries}, {"accepts", accepts}, {"total", crt.entries.size()},
                                {"seed", seed}};
            files.add(verify.out, report.dump(2) + "\n");
            out << "verified entries=" << crt.entries.size() << " accepts=" << accepts << " seed=" << seed << "\n";
        };
    });

    // uupuf-estimate
    struct {
        size_t lambda = 2;
        std::string grid = "0";
        std::string estimator = "collision";
        double delta = 0.1;
        size_t trials = 1000;
        std::string out;
    } est;
    auto *c_est = app.add_subcommand("uupuf-estimate", "Sweep the robustness or collision-resistance estimator");
    c_est->add_option("--lambda", est.lambda, "Qubits of the device");
    c_est->add_option("--epsilon-grid", est.grid, "start:stop:step, inclusive");
    c_est->add_option("--estimator", est.estimator, "collision or robustness");
    c_est->add_option("--delta", est.delta, "delta_c for collision, delta_r for robustness");
    c_est->add_option("--trials", est.trials, "Sampled pairs per point");
    c_est->add_option("--out", est.out, "CSV output (default: stdout)");
    add_seed(c_est);
    c_est->callback([&] {
        action = [&](Outputs &files) {
            const uint64_t seed = resolve_seed(seed_flag);
            Estimator kind;
            if (est.estimator == "collision") {
                kind = Estimator::collision;
            } else if (est.estimator == "robustness") {
                kind = Estimator::robustness;
            } else {
                throw UsageError("--estimator must be collision or robustness");
            }
            auto rows = epsilon_sweep(est.lambda, parse_grid(est.grid), kind, est.delta, est.trials, seed);
            std::string csv = uupuf::estimator_reports_to_csv(rows);
            if (est.out.empty()) {
                out << csv;
            } else {
                files.add(est.out, csv);
                out << "estimated points=" << rows.size() << " estimator=" << est.estimator << " seed=" << seed
                    << "\n";
            }
        };
    });

    // Scenario-backed commands share these.
    std::optional<size_t> trials_flag;
    std::optional<size_t> lambda_flag;
    std::optional<double> t2_flag;
    std::optional<size_t> shots_flag;
    size_t parallel = 1;
    std::string json_out;
    std::string csv_out;
    auto add_run_flags = [&](CLI::App *cmd) {
        add_seed(cmd);
        cmd->add_option("--trials", trials_flag, "Number of sessions");
        cmd->add_option("--t2-us", t2_flag, "Enable channel and memory noise with this T2");
        cmd->add_option("--parallel", parallel, "Worker threads");
        cmd->add_option("--out", json_out, "Metrics JSON output");
        cmd->add_option("--csv", csv_out, "Per-trial CSV output");
    };
    auto run_cfg = [&](harness::ScenarioConfig cfg, Outputs &files) {
        if (trials_flag) cfg.trials = *trials_flag;
        if (lambda_flag) cfg.lambda = *lambda_flag;
        if (shots_flag) cfg.shots_per_qubit = *shots_flag;
        if (t2_flag) {
            NoiseParams n = cfg.channel.noise.value_or(NoiseParams{});
            n.t2_us = *t2_flag;
            cfg.channel.noise = n;
        }
        require_positive(parallel, "--parallel");
        cfg.validate();
        auto metrics = harness::run_scenario(cfg, parallel);
        files.add(json_out, harness::metrics_to_json(cfg, metrics));
        files.add(csv_out, harness::metrics_to_csv(cfg, metrics));
        print_summary(out, cfg, metrics);
    };

    // hmp4-run
    struct {
        size_t registers = 16;
        size_t control = 0;
        size_t t = 12;
        size_t tolerance = 0;
        double dwell = 0.0;
        double latency = 0.0;
        bool noise = false;
        std::string adversary = "none";
    } hmp;
    auto *c_hmp = app.add_subcommand("hmp4-run", "Issue and validate HMP4 tokens");
    c_hmp->add_option("--registers", hmp.registers, "Entangled registers per token");
    c_hmp->add_option("--control-registers", hmp.control, "Product-state control registers");
    c_hmp->add_option("--t", hmp.t, "Registers requested per validation (multiple of 3)");
    c_hmp->add_option("--tolerance", hmp.tolerance, "Allowed failed checks");
    c_hmp->add_option("--dwell-us", hmp.dwell, "Memory time before validation");
    c_hmp->add_option("--latency-us", hmp.latency, "Channel latency");
    c_hmp->add_flag("--noise", hmp.noise, "Enable default channel and memory noise");
    c_hmp->add_option("--adversary", hmp.adversary, "none, intercept_resend, random_guess or token_clone");
    add_run_flags(c_hmp);
    c_hmp->callback([&] {
        action = [&](Outputs &files) {
            harness::ScenarioConfig cfg;
            cfg.protocol = harness::Protocol::hmp4;
            cfg.registers = hmp.registers;
            cfg.control_registers = hmp.control;
            cfg.t = hmp.t;
            cfg.error_tolerance = hmp.tolerance;
            cfg.memory_dwell_us = hmp.dwell;
            cfg.channel.latency_us = hmp.latency;
            if (hmp.noise) {
                cfg.channel.noise = NoiseParams{};
            }
            cfg.adversary = harness::parse_adversary(hmp.adversary);
            cfg.seed = resolve_seed(seed_flag);
            run_cfg(cfg, files);
        };
    });

    // scenario
    std::string config_path;
    auto *c_scn = app.add_subcommand("scenario", "Run a scenario described by a JSON config");
    c_scn->add_option("--config", config_path, "Scenario JSON")->required();
    c_scn->add_option("--lambda", lambda_flag, "Override lambda");
    c_scn->add_option("--shots", shots_flag, "Override shots_per_qubit");
    add_run_flags(c_scn);
    c_scn->callback([&] {
        action = [&](Outputs &files) {
            const std::string text = read_file(config_path);
            auto cfg = harness::parse_scenario_config(text);
            bool config_has_seed = false;
            try {
                config_has_seed = nlohmann::json::parse(text).contains("seed");
            } catch (const std::exception &) {
            }
            if (seed_flag || !config_has_seed) {
                cfg.seed = resolve_seed(seed_flag);
            }
            run_cfg(cfg, files);
        };
    });

    // dephasing-curve
    struct {
        double t2 = 108.6;
        double t_max = 100.0;
        size_t points = 11;
        size_t shots = 100000;
        std::string out;
    } deph;
    auto *c_deph = app.add_subcommand("dephasing-curve", "Flip rate of a stored |+> versus memory time");
    c_deph->add_option("--t2-us", deph.t2, "T2 in microseconds");
    c_deph->add_option("--t-max-us", deph.t_max, "Last grid time");
    c_deph->add_option("--points", deph.points, "Grid points (>= 2)");
    c_deph->add_option("--shots", deph.shots, "Shots per point");
    c_deph->add_option("--out", deph.out, "CSV output (default: stdout)");
    add_seed(c_deph);
    c_deph->callback([&] {
        action = [&](Outputs &files) {
            const uint64_t seed = resolve_seed(seed_flag);
            auto rows = dephasing_curve(deph.t2, deph.t_max, deph.points, deph.shots, seed);
            std::string csv = dephasing_csv(rows);
            if (deph.out.empty()) {
                out << csv;
            } else {
                files.add(deph.out, csv);
                out << "dephasing points=" << rows.size() << " t2_us=" << format_double(deph.t2)
                    << " seed=" << seed << "\n";
            }
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    Outputs files;
    try {
        action(files);
    } catch (const UsageError &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const harness::ConfigError &e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        err << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    try {
        files.commit();
    } catch (const std::exception &e) {
        err << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace qtoksim::cli
