// gpacforge: compile Turing machines into clocked ODE systems, integrate
// polynomial IVPs with arc-length accounting, and verify the quantified
// contracts of the gadget toolbox.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "gpacforge/analog.hpp"
#include "gpacforge/batch.hpp"
#include "gpacforge/verify.hpp"

using namespace gpacforge;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitProperty = 3;

int env_int(const char* name, int fallback) {
    if (const char* v = std::getenv(name)) return std::atoi(v);
    return fallback;
}

IntegrationConfig base_config() {
    IntegrationConfig cfg;
    cfg.precision_bits = env_int("GPACFORGE_PRECISION_BITS", 128);
    cfg.local_tol_log2 = env_int("GPACFORGE_LOCAL_TOL", -40);
    return cfg;
}

std::vector<int> parse_word(const std::string& w) {
    std::vector<int> out;
    for (char c : w) {
        if (c < '0' || c > '9') throw ParseError("word must be a digit string");
        out.push_back(c - '0');
    }
    return out;
}

std::string word_str(const std::vector<int>& w) {
    std::string s;
    for (int c : w) s += static_cast<char>('0' + c);
    return s;
}

void write_run_outputs(const std::string& out_prefix, const Trajectory& tr,
                       const IntegrationConfig& cfg, std::uint64_t seed) {
    std::ofstream csv(out_prefix + ".csv");
    write_trajectory_csv(csv, tr);
    save_json_file(out_prefix + ".json", trajectory_sidecar(tr, cfg, seed));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polynomial-ODE compiler and simulator for analog computation"};
    app.require_subcommand(1);

    // ---- compile-tm ----
    auto* c_compile = app.add_subcommand("compile-tm",
                                         "compile a Turing machine into its clocked iteration system");
    std::string tm_path, emit_path = "pivp.json";
    double compile_mu = 2.0;
    long compile_steps = 8;
    c_compile->add_option("tm", tm_path, "machine JSON")->required();
    c_compile->add_option("--mu", compile_mu, "output precision exponent");
    c_compile->add_option("--steps", compile_steps, "iteration budget baked into the schedule");
    c_compile->add_option("--emit", emit_path, "output path");

    // ---- simulate ----
    auto* c_sim = app.add_subcommand("simulate", "integrate a PIVP from a JSON file");
    std::string pivp_path, y0_str, out_prefix = "trajectory";
    double sim_t = -1, sim_len = -1;
    int sim_order = 10, sim_prec = 0, sim_tol = 0;
    c_sim->add_option("pivp", pivp_path, "PIVP JSON")->required();
    c_sim->add_option("--y0", y0_str, "comma-separated rational initial state (default: the file's)");
    c_sim->add_option("--t", sim_t, "final time");
    c_sim->add_option("--length", sim_len, "length budget");
    c_sim->add_option("--order", sim_order, "Taylor order");
    c_sim->add_option("--precision-bits", sim_prec, "working precision");
    c_sim->add_option("--local-tol", sim_tol, "log2 of the local tolerance (negative)");
    c_sim->add_option("--out", out_prefix, "output prefix for .csv/.json");

    // ---- emulate ----
    auto* c_em = app.add_subcommand("emulate", "run a machine through the clocked ODE iteration");
    std::string em_tm, em_word, em_out = "emulate";
    long em_steps = -1;
    c_em->add_option("tm", em_tm, "machine JSON")->required();
    c_em->add_option("word", em_word, "input word (letter digits)")->required();
    c_em->add_option("--steps", em_steps, "cycle budget (default: 2|w|+4)");
    c_em->add_option("--out", em_out, "output prefix");

    // ---- recognize ----
    auto* c_rec = app.add_subcommand("recognize", "decide even word length through the analog recognizer");
    std::string rec_word, rec_out = "recognize";
    c_rec->add_option("word", rec_word, "input word over {0,1}")->required();
    c_rec->add_option("--out", rec_out, "output prefix");

    // ---- gadget-test ----
    auto* c_gad = app.add_subcommand("gadget-test", "conformance report for one gadget");
    std::string gadget_name, gad_out;
    std::uint64_t gad_seed = 1;
    bool gad_serial = false;
    int gad_points = 20;
    double gad_lo = -2.0, gad_hi = 2.0;
    std::vector<int> gad_mus{1, 2, 5, 10, 20};
    c_gad->add_option("gadget", gadget_name, "one of smooth_sign, abs, clamped_exp, rnd_star, lxh_hxl")
        ->required();
    c_gad->add_option("--seed", gad_seed, "RNG seed");
    c_gad->add_option("--points", gad_points, "grid size");
    c_gad->add_option("--lo", gad_lo, "grid lower end");
    c_gad->add_option("--hi", gad_hi, "grid upper end");
    c_gad->add_option("--mu", gad_mus, "accuracy exponents to test");
    c_gad->add_option("--out", gad_out, "write the JSON report here (default stdout)");
    c_gad->add_flag("--serial", gad_serial, "disable the OpenMP batch");

    // ---- bench-solver ----
    auto* c_bench = app.add_subcommand("bench-solver", "batch throughput, serial vs OpenMP");
    int bench_runs = 32;
    c_bench->add_option("--runs", bench_runs, "number of integrations in the batch");

    // ---- verify ----
    auto* c_ver = app.add_subcommand("verify", "run a conformance suite");
    std::string suite_name;
    std::uint64_t ver_seed = 1;
    bool ver_serial = false;
    std::string ver_out;
    c_ver->add_option("suite", suite_name, "gadgets | real-step | emulate | recognize | solver-order")
        ->required();
    c_ver->add_option("--seed", ver_seed, "RNG seed");
    c_ver->add_flag("--serial", ver_serial, "disable the OpenMP batch");
    c_ver->add_option("--out", ver_out, "write the JSON report here (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*c_compile) {
            Json mj = load_json_file(tm_path);
            tm::Machine m = tm::machine_from_json(mj);
            const int k = m.base;
            tm::CompiledStep cs = tm::compile_step(m);
            Rational rho(1, 4 * k * k);
            auto map = analog::real_step_map(cs, rho);
            auto sched = analog::IterationSchedule::for_map(map, Rational(1));
            // expression-driven description of the iteration system
            Json j;
            j["kind"] = "tm-iteration";
            j["machine"] = machine_to_json(m);
            j["mu_step"] = Json{{"rho", rational_to_json(rho)}, {"note", "mu = ln(4k^2)"}};
            j["schedule"] = Json{{"omega", rational_to_json(sched.omega)},
                                 {"tau", rational_to_json(Rational(sched.tau))},
                                 {"mho", poly_to_json(sched.mho)},
                                 {"pi", poly_to_json(sched.pi)},
                                 {"nu", "n*mho(l*) + n*ln6 + mu + ln3"},
                                 {"steps", compile_steps},
                                 {"mu_out", compile_mu}};
            // registers: clock + 3 copies of the 4-real configuration
            j["dimension"] = 1 + 3 * 4;
            j["dimension_formula"] = "1 + 3 * 4 (clock, w, y, z over the 4-real encoding)";
            Json vars = Json::array();
            vars.push_back("T");
            for (const char* grp : {"w", "y", "z"})
                for (const char* c2 : {"x", "sigma", "y", "q"})
                    vars.push_back(std::string(grp) + "." + c2);
            j["variables"] = vars;
            j["interpolation"] = Json{{"delta1", poly_to_json(cs.d1)},
                                      {"delta2", poly_to_json(cs.d2)},
                                      {"delta3", poly_to_json(cs.d3)}};
            // the analytic part of the construction closes polynomially:
            // export the compiled clock gate as a plain PIVP
            {
                Expr t = ex_time();
                Expr arg = ex_mul(ex_const(Rational(4)),
                                  ex_sub(ex_sin(ex_add(t, t)), ex_const(Rational(1, 2))));
                Expr theta = ex_add(ex_const(Rational(1, 2)),
                                    ex_mul(ex_const(Rational(1, 2)), ex_tanh(arg)));
                auto cr = closure_compile({theta}, ClosureEnv{});
                j["clock_export"] = pivp_to_json(cr.pivp);
            }
            j["clock_export_note"] =
                "sin/cos/tanh gates close polynomially; the rnd* branches of the "
                "step map stay expression-driven";
            save_json_file(emit_path, j);
            std::cout << "wrote " << emit_path << " (dimension " << j["dimension"] << ")\n";
            return 0;
        }

        if (*c_sim) {
            Json pj = load_json_file(pivp_path);
            Pivp p = pivp_from_json(pj);
            IntegrationConfig cfg = base_config();
            cfg.order = sim_order;
            if (sim_prec > 0) cfg.precision_bits = sim_prec;
            if (sim_tol < 0) cfg.local_tol_log2 = sim_tol;
            std::vector<Rational> y0;
            if (!y0_str.empty()) {
                std::stringstream ss(y0_str);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    auto slash = item.find('/');
                    if (slash == std::string::npos)
                        y0.push_back(rational_from_strings(item, "1"));
                    else
                        y0.push_back(rational_from_strings(item.substr(0, slash),
                                                           item.substr(slash + 1)));
                }
            } else {
                y0 = p.init_for({});
            }
            Trajectory tr;
            if (sim_len > 0) {
                tr = integrate_until_length(p, y0, Rational(sim_len), cfg);
            } else {
                double t_end = sim_t > 0 ? sim_t : 1.0;
                tr = integrate(p, y0, Rational(t_end), cfg);
            }
            write_run_outputs(out_prefix, tr, cfg, 0);
            std::cout << "stop: " << to_string(tr.stop_reason) << ", t = " << tr.back().t.str()
                      << ", len = " << tr.back().len.str() << "\n";
            if (tr.stop_reason == StopReason::Divergence ||
                tr.stop_reason == StopReason::StepUnderflow)
                return kExitNumerical;
            return 0;
        }

        if (*c_em) {
            Json mj = load_json_file(em_tm);
            tm::Machine m = tm::machine_from_json(mj);
            auto letters = parse_word(em_word);
            long budget = em_steps > 0 ? em_steps : 2 * static_cast<long>(letters.size()) + 4;
            IntegrationConfig cfg = base_config();
            cfg.order = 16;
            auto res = analog::emulate_tm(m, letters, budget, BigFloat(2l, cfg.precision_bits),
                                          cfg, static_cast<long>(letters.size()) + budget);
            std::ofstream csv(em_out + ".csv");
            write_trajectory_csv(csv, res.iteration.traj);
            Json j;
            j["word"] = word_str(res.output_letters);
            j["length_used"] = res.iteration.traj.back().len.str();
            j["crossing_time"] = nullptr;
            j["violations"] = 0;
            save_json_file(em_out + ".json", j);
            std::cout << "output word: " << word_str(res.output_letters) << "\n";
            return 0;
        }

        if (*c_rec) {
            auto prog = analog::parity_recognizer();
            IntegrationConfig cfg = base_config();
            cfg.order = 16;
            auto out = analog::recognize(prog, parse_word(rec_word), cfg);
            Json j;
            j["verdict"] = analog::to_string(out.verdict);
            j["length_used"] = out.length_used.str();
            j["crossing_time"] =
                out.first_crossing_time ? Json(out.first_crossing_time->str()) : Json(nullptr);
            j["violations"] = out.stability_violations;
            save_json_file(rec_out + ".json", j);
            std::cout << analog::to_string(out.verdict) << "\n";
            return out.verdict == analog::Verdict::Undecided ? kExitNumerical : 0;
        }

        if (*c_gad) {
            Json rep = verify::gadget_conformance(gadget_name, gad_seed, !gad_serial,
                                                  gad_points, gad_lo, gad_hi, gad_mus);
            if (gad_out.empty())
                std::cout << rep.dump(2) << "\n";
            else
                save_json_file(gad_out, rep);
            return rep["pass"].get<bool>() ? 0 : kExitProperty;
        }

        if (*c_bench) {
            Json rep = verify::bench_solver(bench_runs);
            std::cout << rep.dump(2) << "\n";
            return rep["identical_results"].get<bool>() ? 0 : kExitProperty;
        }

        if (*c_ver) {
            auto res = verify::run_suite(suite_name, ver_seed, !ver_serial);
            Json rep = res.to_json();
            if (ver_out.empty())
                std::cout << rep.dump(2) << "\n";
            else
                save_json_file(ver_out, rep);
            for (const auto& p : res.properties)
                std::cerr << (p.pass ? "[pass] " : "[FAIL] ") << p.name << " (" << p.detail
                          << ")\n";
            return res.pass() ? 0 : kExitProperty;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
