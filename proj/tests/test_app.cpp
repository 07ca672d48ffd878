#include <scatterlab/app/config.hpp>
#include <scatterlab/app/runner.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace scatterlab;
using namespace scatterlab::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "scatterlab-tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error(std::string_view text, Mode mode) {
    try {
        parse_config_text(text, mode);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* steady_text = R"({
  // trivial chain
  "center": {"model": "ssh", "v": 6, "w": 4, "cells": 20},
  "lead": {"J": -0.1, "mu": 0}
})";

} // namespace

TEST(ParseConfig, SteadyDefaults) {
    const auto cfg = parse_config_text(steady_text, Mode::steady);
    ASSERT_TRUE(std::holds_alternative<SSHCenter>(cfg.center));
    EXPECT_EQ(std::get<SSHCenter>(cfg.center).v, 6.0);
    EXPECT_EQ(cfg.lead.hopping, -0.1);
    EXPECT_EQ(cfg.lead.length, 200);
    EXPECT_DOUBLE_EQ(cfg.k, std::numbers::pi / 2);
    EXPECT_EQ(cfg.label, "steady");
}

TEST(ParseConfig, UnknownKeysAreNamed) {
    EXPECT_NE(config_error(R"({"center": {"model": "ssh", "v": 1, "w": 2, "cells": 2}, "lead": {"J": -0.1}, "colour": 1})",
                           Mode::steady)
                  .find("'colour'"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"center": {"model": "ssh", "v": 1, "w": 2, "cells": 2, "gamma": 3}, "lead": {"J": -0.1}})",
                           Mode::steady)
                  .find("'center.gamma'"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"center": {"model": "ssh", "v": 1, "w": 2, "cells": 2}, "lead": {"J": -0.1, "len": 3}})",
                           Mode::steady)
                  .find("'lead.len'"),
              std::string::npos);
}

TEST(ParseConfig, MissingAndMistypedFields) {
    EXPECT_NE(config_error(R"({"center": {"model": "ssh", "v": 1, "cells": 2}, "lead": {"J": -0.1}})", Mode::steady)
                  .find("missing required field 'center.w'"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"center": {"model": "ssh", "v": 1, "w": 2, "cells": 2}})", Mode::steady)
                  .find("'lead'"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"center": {"model": "ssh", "v": "a", "w": 2, "cells": 2}, "lead": {"J": -0.1}})",
                           Mode::steady)
                  .find("'center.v' must be a number"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"center": {"model": "ssh", "v": 1, "w": 2, "cells": 2.5}, "lead": {"J": -0.1}})",
                           Mode::steady)
                  .find("'center.cells' must be an integer"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"center": {"model": "kagome"}, "lead": {"J": -0.1}})", Mode::steady).find("kagome"),
              std::string::npos);
}

TEST(ParseConfig, MalformedTextReportsPosition) {
    const auto msg = config_error("{\n  \"center\": {\"model\": \"ssh\",\n  }\n}", Mode::steady);
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ParseConfig, ContradictoryModeFields) {
    EXPECT_NE(config_error(R"({"center": {"model": "ssh", "v": 1, "w": 2, "cells": 2}, "lead": {"J": -0.1},
                               "scan": {"mu_min": 0, "mu_max": 1}})",
                           Mode::steady)
                  .find("not valid for mode 'steady'"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"center": {"model": "ssh", "v": 1, "w": 2, "cells": 2}, "lead": {"J": 1, "mu": 2},
                               "scan": {"mu_min": 0, "mu_max": 1}})",
                           Mode::mu_scan)
                  .find("'lead.mu' contradicts mode 'mu-scan'"),
              std::string::npos);
    EXPECT_NE(config_error(R"({"center": {"model": "ssh", "v": 1, "w": 2, "cells": 2}, "lead": {"J": -0.1},
                               "sweep": {"q": [0.5]}})",
                           Mode::q_sweep)
                  .find("'center' is not valid for mode 'q-sweep'"),
              std::string::npos);
    EXPECT_THROW(parse_mode("reproduce"), ConfigError);
}

TEST(ParseConfig, CustomCenterWithImaginaryPart) {
    const auto cfg = parse_config_text(R"({"center": {"model": "custom", "real": [[0, 1], [1, 0]],
                                                      "imag": [[-1, 0], [0, 1]]},
                                           "lead": {"J": -0.5}})",
                                       Mode::steady);
    const auto& m = std::get<CustomCenter>(cfg.center).matrix;
    EXPECT_EQ(m(0, 0), cplx(0.0, -1.0));
    EXPECT_EQ(m(0, 1), cplx(1.0, 0.0));
    EXPECT_NE(config_error(R"({"center": {"model": "custom", "real": [[0, 1], [1]]}, "lead": {"J": -0.5}})",
                           Mode::steady)
                  .find("ragged"),
              std::string::npos);
}

TEST(ParseConfig, QSweepAcceptsTransitionPoint) {
    const auto cfg = parse_config_text(R"({"lead": {"J": -0.1}, "sweep": {"q": [0.5, 1.0, 1.5]}})", Mode::q_sweep);
    EXPECT_EQ(cfg.sweep.q.size(), 3u);
    EXPECT_NO_THROW(validate(cfg));
}

TEST(Validate, PhysicsPreconditionsBeforeRunning) {
    auto cfg = parse_config_text(R"({"center": {"model": "ssh", "v": 2, "w": 4, "cells": 2}, "lead": {"J": -0.1,
                                     "length": 50}, "packet": {"center_site": -40}})",
                                 Mode::dynamics);
    EXPECT_THROW(validate(cfg), PreconditionError);
    cfg = parse_config_text(R"({"center": {"model": "ssh", "v": 2, "w": 4, "cells": 2}, "lead": {"J": 0}})",
                            Mode::steady);
    EXPECT_THROW(validate(cfg), PreconditionError);
    cfg = parse_config_text(R"({"center": {"model": "ssh", "v": 2, "w": 4, "cells": 0}, "lead": {"J": -0.1}})",
                            Mode::steady);
    EXPECT_THROW(validate(cfg), PreconditionError);
}

TEST(ReproduceFigure, Expansions) {
    const auto a = reproduce_figure("3a", "out");
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].mode, Mode::dynamics);
    const auto& c = std::get<SSHCenter>(a[0].center);
    EXPECT_EQ(c.v, 2.0);
    EXPECT_EQ(c.w, 4.0);
    EXPECT_EQ(c.cells, 20);
    EXPECT_EQ(a[0].lead.hopping, -0.1);
    EXPECT_EQ(a[0].lead.chemical_potential, 0.0);
    EXPECT_EQ(a[0].lead.length, 200);
    EXPECT_EQ(a[0].packet.center_site, -100);
    EXPECT_EQ(a[0].packet.width, 20.0);
    EXPECT_DOUBLE_EQ(a[0].packet.wave_vector, std::numbers::pi / 2);
    EXPECT_EQ(fs::path(a[0].out_dir), fs::path("out") / "fig3a");

    EXPECT_EQ(std::get<SSHCenter>(reproduce_figure("3d")[0].center).v, 6.0);
    const auto sweep = reproduce_figure("5");
    EXPECT_EQ(sweep[0].mode, Mode::q_sweep);
    EXPECT_EQ(sweep[0].sweep.q.size(), 19u);
    const auto nh = reproduce_figure("6b");
    EXPECT_NEAR(nh[0].lead.chemical_potential, analytic::nh_spectrum(40.0, 2.0, 10.0, 4).levels[1].energy, 0.0);
    const auto scans = reproduce_figure("7");
    ASSERT_EQ(scans.size(), 5u);
    for (const auto& s : scans) {
        EXPECT_EQ(s.mode, Mode::mu_scan);
        EXPECT_EQ(s.lead.hopping, 1.0);
        EXPECT_EQ(s.scan.step, 1e-3);
    }
    EXPECT_THROW(reproduce_figure("4"), ConfigError);
}

TEST(Run, SteadyTrivialSummary) {
    auto cfg = parse_config_text(steady_text, Mode::steady);
    cfg.out_dir = scratch("steady").string();
    const auto out = run(cfg);
    const auto summary = json::parse(slurp(out.dir / "summary.json"));
    EXPECT_NEAR(summary["outputs"]["reflection"]["re"].get<double>(), -1.0, 2e-3);
    EXPECT_EQ(summary["inputs"]["center"]["v"].get<double>(), 6.0);
    EXPECT_TRUE(summary["theory"].is_object());
    const auto csv = slurp(out.dir / "channels.csv");
    EXPECT_EQ(csv.rfind("# scatterlab-csv v1\nchannel,probability,theory", 0), 0u);
}

TEST(Run, DynamicsArtifactsAreDeterministic) {
    const char* text = R"({"center": {"model": "ssh", "v": 2, "w": 4, "cells": 2},
                           "lead": {"J": -0.5, "length": 60},
                           "packet": {"center_site": -30, "width": 5}})";
    auto cfg = parse_config_text(text, Mode::dynamics);
    cfg.out_dir = scratch("dyn-a").string();
    const auto a = run(cfg);
    cfg.out_dir = scratch("dyn-b").string();
    const auto b = run(cfg);
    ASSERT_EQ(a.files, b.files);
    for (const auto& f : a.files) {
        if (f == "summary.json")
            continue;
        EXPECT_EQ(slurp(a.dir / f), slurp(b.dir / f)) << f;
    }
    for (const char* f : {"channels.csv", "trajectory.csv", "snapshots.csv", "sites.csv", "trajectory.svg",
                          "final_state.svg"})
        EXPECT_TRUE(fs::exists(a.dir / f)) << f;
}

TEST(Run, QSweepMarksTransitionAndIgnoresWorkerCount) {
    const char* text = R"({"lead": {"J": -0.5, "length": 80},
                           "packet": {"center_site": -40, "width": 6},
                           "sweep": {"q": [0.5, 1.0, 1.5], "cells": 3}})";
    auto cfg = parse_config_text(text, Mode::q_sweep);
    cfg.workers = 1;
    cfg.out_dir = scratch("qs-1").string();
    const auto a = run(cfg);
    cfg.workers = 3;
    cfg.out_dir = scratch("qs-3").string();
    const auto b = run(cfg);
    const auto csv = slurp(a.dir / "qsweep.csv");
    EXPECT_EQ(csv, slurp(b.dir / "qsweep.csv"));
    EXPECT_NE(csv.find("1,excluded (transition),,,,"), std::string::npos) << csv;
    EXPECT_NE(csv.find("q,status,V1_measured,V1_theory,r2_measured,r2_theory"), std::string::npos);
}

TEST(Run, MuScanListsResonances) {
    const char* text = R"({"center": {"model": "ssh", "v": 2, "w": 4, "cells": 3}, "lead": {"J": 1},
                           "scan": {"alpha": 1, "mu_min": -7, "mu_max": 7, "step": 0.01}})";
    auto cfg = parse_config_text(text, Mode::mu_scan);
    cfg.out_dir = scratch("scan").string();
    const auto out = run(cfg);
    const auto summary = json::parse(slurp(out.dir / "summary.json"));
    EXPECT_EQ(summary["outputs"]["resonances"].size(), 6u);
    EXPECT_TRUE(fs::exists(out.dir / "reflectance.svg"));
    EXPECT_NE(slurp(out.dir / "resonances.csv").find("accepted"), std::string::npos);
}

#ifdef SCATTERLAB_CLI_PATH
namespace {
int cli(const std::string& args) {
    const int status = std::system((std::string(SCATTERLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
} // namespace

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    std::ofstream(dir / "bad.json") << R"({"center": {"model": "ssh", "v": 2, "w": 4, "cells": 2}, "lead": {"J": -0.1}, "x": 1})";
    std::ofstream(dir / "pre.json") << R"({"center": {"model": "ssh", "v": 2, "w": 4, "cells": 2}, "lead": {"J": -0.1}, "k": 0})";
    std::ofstream(dir / "ok.json") << R"({"center": {"model": "ssh", "v": 2, "w": 4, "cells": 2}, "lead": {"J": -0.1}})";
    EXPECT_EQ(cli("steady --config " + (dir / "bad.json").string()), 2);
    EXPECT_EQ(cli("steady --config " + (dir / "missing.json").string()), 2);
    EXPECT_EQ(cli("steady --config " + (dir / "pre.json").string()), 3);
    EXPECT_EQ(cli("steady --config " + (dir / "ok.json").string() + " --out " + (dir / "o").string()), 0);
    EXPECT_EQ(cli("reproduce-fig 9z"), 2);
    EXPECT_EQ(cli("steady"), 2);
    EXPECT_TRUE(fs::exists(dir / "o" / "summary.json"));
}
#endif
