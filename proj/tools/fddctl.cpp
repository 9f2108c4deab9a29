// fddctl: pipeline orchestration CLI.
//
// Stages write their artifacts under the data root and stamp them with the
// config hash; downstream stages refuse artifacts from a different config.
// Exit codes: 0 ok, 1 usage, 2 config/input, 3 artifact version, 4
// acceptance-threshold failure in evaluate mode.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fdd/pipeline.hpp"

namespace fs = std::filesystem;
using fdd::pipeline::PipelineConfig;
using nlohmann::json;

namespace {

struct Paths {
    fs::path root;
    fs::path traj_dir() const { return root / "trajectories"; }
    fs::path manifest() const { return root / "manifest.json"; }
    fs::path tcae() const { return root / "tcae.fddc"; }
    fs::path features() const { return root / "features.fddc"; }
    fs::path gbt_bin() const { return root / "gbt_bin.fddc"; }
    fs::path gbt_diag() const { return root / "gbt_diag.fddc"; }
    fs::path calib() const { return root / "calib.json"; }
    fs::path ood() const { return root / "ood.fddc"; }
    fs::path report() const { return root / "report.txt"; }
};

json load_manifest(const Paths& p, const PipelineConfig& cfg) {
    auto m = fdd::io::load_json(p.manifest().string());
    if (m.at("config_hash").get<std::string>() != cfg.hash_hex())
        throw fdd::io::VersionError("manifest was built with a different config");
    return m;
}

fdd::data::Scaler scaler_from_manifest(const json& m) {
    fdd::data::Scaler sc;
    sc.mins = m.at("scaler").at("mins").get<std::vector<float>>();
    sc.maxs = m.at("scaler").at("maxs").get<std::vector<float>>();
    return sc;
}

std::uint64_t scaler_hash(const fdd::data::Scaler& sc) {
    std::uint64_t h = fdd::fnv1a64(sc.mins.data(), sc.mins.size() * sizeof(float));
    return fdd::fnv1a64(sc.maxs.data(), sc.maxs.size() * sizeof(float), h);
}

fs::path traj_path(const Paths& p, std::int64_t id) {
    return p.traj_dir() / ("traj_" + std::to_string(id) + ".fddt");
}

std::vector<fdd::sim::Trajectory> load_split(const Paths& p, const json& m,
                                             const std::string& split) {
    std::vector<fdd::sim::Trajectory> out;
    for (auto id : m.at("splits").at(split).get<std::vector<std::int64_t>>())
        out.push_back(fdd::io::load_trajectory(traj_path(p, id).string()));
    return out;
}

std::vector<fdd::data::Window> split_windows(const Paths& p, const json& m,
                                             const std::string& split,
                                             const PipelineConfig& cfg) {
    auto sc = scaler_from_manifest(m);
    std::vector<fdd::data::Window> out;
    for (const auto& t : load_split(p, m, split)) {
        auto ws = fdd::data::windows(t, sc, cfg.window, cfg.step);
        out.insert(out.end(), std::make_move_iterator(ws.begin()),
                   std::make_move_iterator(ws.end()));
    }
    return out;
}

std::vector<fdd::data::Window> nominal_only(std::vector<fdd::data::Window> ws) {
    std::vector<fdd::data::Window> out;
    for (auto& w : ws)
        if (w.label == 0) out.push_back(std::move(w));
    return out;
}

// ---- feature container helpers ----

const char* const kSplits[4] = {"train", "val", "val2", "test"};

void save_features(const Paths& p, const PipelineConfig& cfg,
                   const std::map<std::string, std::vector<fdd::pipeline::FeatureRow>>& by_split) {
    json meta;
    meta["config_hash"] = cfg.hash_hex();
    std::vector<fdd::io::NamedTensor> tensors;
    for (const auto& name : kSplits) {
        const auto& rows = by_split.at(name);
        meta["counts"][name] = rows.size();
        fdd::io::NamedTensor z, r, e, lbl, tid, start, ttype;
        z.name = std::string(name) + ".z";
        r.name = std::string(name) + ".r";
        e.name = std::string(name) + ".e";
        lbl.name = std::string(name) + ".label";
        tid.name = std::string(name) + ".traj_id";
        start.name = std::string(name) + ".start";
        ttype.name = std::string(name) + ".traj_type";
        for (const auto& row : rows) {
            z.data.insert(z.data.end(), row.z.begin(), row.z.end());
            r.data.insert(r.data.end(), row.r.begin(), row.r.end());
            e.data.push_back(row.e);
            lbl.data.push_back(static_cast<float>(row.label));
            tid.data.push_back(static_cast<float>(row.traj_id));
            start.data.push_back(static_cast<float>(row.start_index));
            ttype.data.push_back(static_cast<float>(static_cast<int>(row.traj_type)));
        }
        for (auto* t : {&z, &r, &e, &lbl, &tid, &start, &ttype})
            tensors.push_back(std::move(*t));
    }
    fdd::io::save_container(p.features().string(), "features", std::move(meta), tensors);
}

std::map<std::string, std::vector<fdd::pipeline::FeatureRow>> load_features(
    const Paths& p, const PipelineConfig& cfg) {
    auto c = fdd::io::load_container(p.features().string(), "features");
    if (c.meta.at("config_hash").get<std::string>() != cfg.hash_hex())
        throw fdd::io::VersionError("features were extracted with a different config");
    std::map<std::string, std::vector<fdd::pipeline::FeatureRow>> out;
    for (const auto& name : kSplits) {
        auto n = c.meta.at("counts").at(name).get<std::size_t>();
        const auto& z = c.tensor(std::string(name) + ".z").data;
        const auto& r = c.tensor(std::string(name) + ".r").data;
        const auto& e = c.tensor(std::string(name) + ".e").data;
        const auto& lbl = c.tensor(std::string(name) + ".label").data;
        const auto& tid = c.tensor(std::string(name) + ".traj_id").data;
        const auto& start = c.tensor(std::string(name) + ".start").data;
        const auto& ttype = c.tensor(std::string(name) + ".traj_type").data;
        std::size_t zc = n ? z.size() / n : 0, rc = n ? r.size() / n : 0;
        std::vector<fdd::pipeline::FeatureRow> rows(n);
        for (std::size_t i = 0; i < n; ++i) {
            rows[i].z.assign(z.begin() + static_cast<std::ptrdiff_t>(i * zc),
                             z.begin() + static_cast<std::ptrdiff_t>((i + 1) * zc));
            rows[i].r.assign(r.begin() + static_cast<std::ptrdiff_t>(i * rc),
                             r.begin() + static_cast<std::ptrdiff_t>((i + 1) * rc));
            rows[i].e = e[i];
            rows[i].label = static_cast<int>(lbl[i]);
            rows[i].traj_id = static_cast<std::int64_t>(tid[i]);
            rows[i].start_index = static_cast<std::int64_t>(start[i]);
            rows[i].traj_type = static_cast<fdd::sim::TrajType>(static_cast<int>(ttype[i]));
        }
        out[name] = std::move(rows);
    }
    return out;
}

std::vector<fdd::pipeline::FeatureRow> calibration_rows(
    std::map<std::string, std::vector<fdd::pipeline::FeatureRow>>& by_split) {
    auto rows = by_split["val"];
    rows.insert(rows.end(), by_split["val2"].begin(), by_split["val2"].end());
    return rows;
}

fdd::pipeline::Pipeline load_pipeline(const Paths& p, const PipelineConfig& cfg) {
    auto m = load_manifest(p, cfg);
    fdd::pipeline::Pipeline pl{cfg,
                               scaler_from_manifest(m),
                               fdd::pipeline::load_tcae(p.tcae().string(), cfg.hash_hex()),
                               fdd::pipeline::load_gbt(p.gbt_bin().string(), cfg.hash_hex()),
                               fdd::pipeline::load_gbt(p.gbt_diag().string(), cfg.hash_hex()),
                               {},
                               {},
                               {}};
    auto cj = fdd::io::load_json(p.calib().string());
    if (cj.at("config_hash").get<std::string>() != cfg.hash_hex())
        throw fdd::io::VersionError("calibrators were fitted with a different config");
    pl.binary_calibrator = fdd::pipeline::calibrator_from_json(cj.at("binary"));
    for (const auto& j : cj.at("multiclass"))
        pl.multiclass_calibrator.per_class.push_back(fdd::pipeline::calibrator_from_json(j));
    auto oc = fdd::io::load_container(p.ood().string(), "ood");
    if (oc.meta.at("config_hash").get<std::string>() != cfg.hash_hex())
        throw fdd::io::VersionError("ood threshold was calibrated with a different config");
    pl.conformal.alpha = oc.meta.at("alpha").get<double>();
    pl.conformal.thr_ood = oc.meta.at("thr_ood").get<double>();
    pl.conformal.n = oc.meta.at("n").get<std::size_t>();
    return pl;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw fdd::io::ArtifactError("cannot open for writing: " + path.string());
    os << text;
}

// ---- stage implementations ----

void cmd_simulate(const Paths& p, const PipelineConfig& cfg) {
    fs::create_directories(p.traj_dir());
    auto spec = cfg.final_total > 0
                    ? fdd::sim::final_spec(cfg.final_total, cfg.include_t1)
                    : fdd::sim::dev_spec(cfg.dev_per_class, cfg.include_t1);
    auto trajs = fdd::sim::generate_dataset(spec, cfg.seed);

    // synthetic OOD: affine-transformed copies of fresh nominal trajectories
    const std::tuple<int, double, double, double> ood_classes[] = {
        {20, -1.0, 5.0, 0.0},
        {21, 1.0, 5.0, 0.0},
        {22, 1.0, 5.0, 1e-5},
    };
    std::int64_t next_id = static_cast<std::int64_t>(trajs.size());
    fdd::Rng ood_rng(cfg.seed ^ 0x00dull);
    for (const auto& [lbl, var, shift, trend] : ood_classes) {
        for (int i = 0; i < cfg.n_ood_per_class; ++i) {
            auto params = fdd::sim::sample_params(0, ood_rng);
            auto src = fdd::sim::simulate(params, fdd::sim::TrajType::T3,
                                          spec.duration_t3, ood_rng.next_u64());
            auto t = fdd::sim::make_ood(src, var, shift, trend, lbl);
            t.id = next_id++;
            trajs.push_back(std::move(t));
        }
    }
    for (const auto& t : trajs)
        fdd::io::save_trajectory(t, traj_path(p, t.id).string());
    std::cout << "simulate: wrote " << trajs.size() << " trajectories\n";
}

void cmd_split(const Paths& p, const PipelineConfig& cfg) {
    std::vector<fdd::sim::Trajectory> in_dist, ood;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p.traj_dir()))
        if (e.path().extension() == ".fddt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw fdd::io::ArtifactError("no trajectories; run simulate first");
    for (const auto& f : files) {
        auto t = fdd::io::load_trajectory(f.string());
        (fdd::pipeline::is_ood_label(t.label) ? ood : in_dist).push_back(std::move(t));
    }
    auto split = fdd::data::split_trajectories(std::move(in_dist), cfg.seed,
                                               cfg.r_train, cfg.r_val, cfg.r_val2);
    // OOD trajectories are test-only
    for (auto& t : ood) split.test.push_back(std::move(t));

    auto sc = fdd::data::fit_scaler(split.train);
    json m;
    m["config_hash"] = cfg.hash_hex();
    m["window"] = cfg.window;
    m["step"] = cfg.step;
    m["scaler"]["mins"] = sc.mins;
    m["scaler"]["maxs"] = sc.maxs;
    auto ids = [](const std::vector<fdd::sim::Trajectory>& v) {
        std::vector<std::int64_t> out;
        for (const auto& t : v) out.push_back(t.id);
        std::sort(out.begin(), out.end());
        return out;
    };
    m["splits"]["train"] = ids(split.train);
    m["splits"]["val"] = ids(split.val);
    m["splits"]["val2"] = ids(split.val2);
    m["splits"]["test"] = ids(split.test);
    fdd::io::save_json(m, p.manifest().string());
    std::cout << "split: train " << split.train.size() << " val " << split.val.size()
              << " val2 " << split.val2.size() << " test " << split.test.size() << "\n";
}

void cmd_train_tcae(const Paths& p, const PipelineConfig& cfg) {
    auto m = load_manifest(p, cfg);
    auto train_w = nominal_only(split_windows(p, m, "train", cfg));
    auto val_w = nominal_only(split_windows(p, m, "val", cfg));
    auto model = fdd::tcae::train(train_w, val_w, cfg.tcae, cfg.tcae_train);
    model.scaler_hash = scaler_hash(scaler_from_manifest(m));
    fdd::pipeline::save_tcae(model, p.tcae().string(), cfg.hash_hex());
    std::cout << "train-tcae: " << model.trained_epochs << " epochs, "
              << model.param_count() << " parameters\n";
}

void cmd_extract(const Paths& p, const PipelineConfig& cfg) {
    auto m = load_manifest(p, cfg);
    auto model = fdd::pipeline::load_tcae(p.tcae().string(), cfg.hash_hex());
    std::map<std::string, std::vector<fdd::pipeline::FeatureRow>> by_split;
    for (const auto& name : kSplits)
        by_split[name] = fdd::pipeline::extract_features(model, split_windows(p, m, name, cfg));
    save_features(p, cfg, by_split);
    std::cout << "extract: " << by_split["train"].size() << " train windows\n";
}

void cmd_train_detector(const Paths& p, const PipelineConfig& cfg) {
    auto by_split = load_features(p, cfg);
    std::vector<std::vector<float>> x;
    std::vector<int> y;
    for (const auto& row : by_split["train"]) {
        x.push_back(row.z);
        y.push_back(row.label != 0 ? 1 : 0);
    }
    auto model = fdd::gbt::fit(x, y, {}, cfg.gbt_binary);
    fdd::pipeline::save_gbt(model, p.gbt_bin().string(), cfg.hash_hex());
    std::cout << "train-detector: " << x.size() << " windows\n";
}

void cmd_train_diagnoser(const Paths& p, const PipelineConfig& cfg) {
    auto by_split = load_features(p, cfg);
    std::vector<std::vector<float>> x;
    std::vector<int> y;
    for (const auto& row : by_split["train"]) {
        if (row.label == 0) continue;
        x.push_back(row.r);
        y.push_back(row.label);
    }
    auto model = fdd::gbt::fit(x, y, {}, cfg.gbt_multiclass);
    fdd::pipeline::save_gbt(model, p.gbt_diag().string(), cfg.hash_hex());
    std::cout << "train-diagnoser: " << x.size() << " fault windows\n";
}

void cmd_calibrate(const Paths& p, const PipelineConfig& cfg) {
    auto by_split = load_features(p, cfg);
    auto rows = calibration_rows(by_split);
    auto det = fdd::pipeline::load_gbt(p.gbt_bin().string(), cfg.hash_hex());
    auto diag = fdd::pipeline::load_gbt(p.gbt_diag().string(), cfg.hash_hex());

    std::vector<double> s_bin;
    std::vector<int> y_bin;
    for (const auto& row : rows) {
        s_bin.push_back(det.predict_proba(row.z)[1]);
        y_bin.push_back(row.label != 0 ? 1 : 0);
    }
    auto bin_cal = fdd::calib::fit(cfg.calib_binary, s_bin, y_bin);

    std::vector<std::vector<double>> s_mc;
    std::vector<int> y_mc;
    for (const auto& row : rows) {
        if (row.label == 0) continue;
        s_mc.push_back(diag.predict_proba(row.r));
        int idx = -1;
        for (std::size_t c = 0; c < diag.class_labels.size(); ++c)
            if (diag.class_labels[c] == row.label) idx = static_cast<int>(c);
        if (idx < 0) throw fdd::io::ArtifactError("calibration label unseen in training");
        y_mc.push_back(idx);
    }
    auto mc_cal = fdd::calib::calibrate_multiclass(s_mc, y_mc, diag.n_classes,
                                                   cfg.calib_multiclass);

    json j;
    j["config_hash"] = cfg.hash_hex();
    j["binary"] = fdd::pipeline::calibrator_to_json(bin_cal);
    j["multiclass"] = json::array();
    for (const auto& c : mc_cal.per_class)
        j["multiclass"].push_back(fdd::pipeline::calibrator_to_json(c));
    fdd::io::save_json(j, p.calib().string());
    std::cout << "calibrate: " << rows.size() << " calibration windows\n";
}

void cmd_calibrate_ood(const Paths& p, const PipelineConfig& cfg) {
    auto by_split = load_features(p, cfg);
    std::vector<double> errors;
    for (const auto& row : calibration_rows(by_split))
        if (row.label == 0) errors.push_back(row.e);
    auto thr = fdd::ood::calibrate(errors, cfg.ood_alpha);
    json meta;
    meta["config_hash"] = cfg.hash_hex();
    meta["alpha"] = thr.alpha;
    meta["thr_ood"] = thr.thr_ood;
    meta["n"] = thr.n;
    fdd::io::NamedTensor errs;
    errs.name = "calibration_errors";
    errs.data.assign(thr.calibration_errors.begin(), thr.calibration_errors.end());
    fdd::io::save_container(p.ood().string(), "ood", std::move(meta), {errs});
    std::cout << "calibrate-ood: n " << thr.n << " thr " << thr.thr_ood << "\n";
}

int cmd_evaluate(const Paths& p, const PipelineConfig& cfg) {
    auto m = load_manifest(p, cfg);
    auto pl = load_pipeline(p, cfg);
    auto test = load_split(p, m, "test");
    auto rep = fdd::pipeline::evaluate_pipeline(pl, test);
    write_text(p.report(), rep.to_text());
    write_text(p.root / "reliability.csv", rep.reliability_csv());
    write_text(p.root / "events.csv", rep.events_csv());
    write_text(p.root / "confidence.csv", rep.confidence_csv());
    std::cout << rep.to_text();
    if (rep.fault_detection.fpr() > cfg.max_fpr) {
        std::cerr << "evaluate: FPR " << rep.fault_detection.fpr()
                  << " exceeds max_fpr " << cfg.max_fpr << "\n";
        return 4;
    }
    return 0;
}

void cmd_stream(const Paths& p, const PipelineConfig& cfg, const std::string& input) {
    auto pl = load_pipeline(p, cfg);
    fdd::sim::Trajectory traj;
    if (input == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        auto tmp = p.root / ".stream_input.fddt";
        write_text(tmp, buf.str());
        traj = fdd::io::load_trajectory(tmp.string());
        fs::remove(tmp);
    } else {
        traj = fdd::io::load_trajectory(input);
    }
    auto res = fdd::pipeline::run_trajectory(pl, traj);
    if (res.trigger) {
        const auto& e = *res.trigger;
        std::cout << "event traj_id=" << e.traj_id << " time_s=" << e.time_s
                  << " probability=" << e.probability << " class=" << e.diagnosed_class
                  << " confidence=" << e.diagnosis_confidence << "\n";
    }
    if (res.ood_warned)
        std::cout << "ood_warning traj_id=" << res.traj_id
                  << " n_ood=" << res.n_ood_windows << "\n";
    std::cout << "processed traj_id=" << res.traj_id << " windows=" << res.n_windows
              << " events=" << (res.trigger ? 1 : 0) << "\n";
}

void cmd_bench_imbalance(const Paths& p, const PipelineConfig& cfg) {
    auto by_split = load_features(p, cfg);
    auto mats = [](const std::vector<fdd::pipeline::FeatureRow>& rows) {
        std::pair<std::vector<std::vector<float>>, std::vector<int>> out;
        for (const auto& row : rows) {
            if (fdd::pipeline::is_ood_label(row.label)) continue;
            out.first.push_back(row.r);
            out.second.push_back(row.label != 0 ? 1 : 0);
        }
        return out;
    };
    auto [xtr, ytr] = mats(by_split["train"]);
    auto [xcal, ycal] = mats(calibration_rows(by_split));
    auto [xte, yte] = mats(by_split["test"]);
    auto bench = fdd::pipeline::benchmark_imbalance(xtr, ytr, xcal, ycal, xte, yte,
                                                    cfg.gbt_binary, cfg.detector.t_fp,
                                                    cfg.seed);
    write_text(p.root / "bench_imbalance.csv", bench.to_csv());
    std::cout << bench.to_csv();
}

void cmd_bench_arch(const Paths& p, const PipelineConfig& cfg) {
    auto m = load_manifest(p, cfg);
    auto train_all = split_windows(p, m, "train", cfg);
    auto train_nom = nominal_only(train_all);
    auto val_nom = nominal_only(split_windows(p, m, "val", cfg));
    auto test_all = split_windows(p, m, "test", cfg);
    {
        // OOD windows don't belong in the architecture comparison
        std::vector<fdd::data::Window> filtered;
        for (auto& w : test_all)
            if (!fdd::pipeline::is_ood_label(w.label)) filtered.push_back(std::move(w));
        test_all = std::move(filtered);
    }

    struct ArchRow {
        int k, L;
    };
    const ArchRow grid[] = {{9, 0}, {5, 0}, {7, 4}};

    std::ostringstream os;
    os << std::setprecision(6);
    os << "k,L,params,bytes,ms_per_window,auroc_e,auroc_z,auroc_r,acc_z,acc_r\n";
    for (const auto& row : grid) {
        auto tc = cfg.tcae;
        tc.k = row.k;
        tc.L = row.L;
        auto model = fdd::tcae::train(train_nom, val_nom, tc, cfg.tcae_train);

        // inference time averaged over 100 consecutive windows
        std::size_t n_time = std::min<std::size_t>(100, test_all.size());
        auto t0 = std::chrono::steady_clock::now();
        for (std::size_t i = 0; i < n_time; ++i) model.infer(test_all[i].values);
        auto t1 = std::chrono::steady_clock::now();
        double ms = std::chrono::duration<double, std::milli>(t1 - t0).count() /
                    static_cast<double>(n_time);

        auto f_train = fdd::pipeline::extract_features(model, train_all);
        auto f_test = fdd::pipeline::extract_features(model, test_all);

        std::vector<double> e_scores;
        std::vector<int> y_bin;
        for (const auto& r : f_test) {
            e_scores.push_back(r.e);
            y_bin.push_back(r.label != 0 ? 1 : 0);
        }
        double auroc_e = fdd::eval::auroc(e_scores, y_bin);

        auto binary_auroc_on = [&](bool use_latent) {
            std::vector<std::vector<float>> x;
            std::vector<int> y;
            for (const auto& r : f_train) {
                x.push_back(use_latent ? r.z : r.r);
                y.push_back(r.label != 0 ? 1 : 0);
            }
            auto gb = fdd::gbt::fit(x, y, {}, cfg.gbt_binary);
            std::vector<double> s;
            for (const auto& r : f_test)
                s.push_back(gb.predict_proba(use_latent ? r.z : r.r)[1]);
            return fdd::eval::auroc(s, y_bin);
        };
        auto multiclass_acc_on = [&](bool use_latent) {
            std::vector<std::vector<float>> x;
            std::vector<int> y;
            for (const auto& r : f_train) {
                if (r.label == 0) continue;
                x.push_back(use_latent ? r.z : r.r);
                y.push_back(r.label);
            }
            auto gb = fdd::gbt::fit(x, y, {}, cfg.gbt_multiclass);
            std::size_t correct = 0, total = 0;
            for (const auto& r : f_test) {
                if (r.label == 0) continue;
                correct += gb.predict_class(use_latent ? r.z : r.r) == r.label;
                ++total;
            }
            return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
        };

        os << row.k << "," << model.cfg.L << "," << model.param_count() << ","
           << model.param_count() * sizeof(double) << "," << ms << "," << auroc_e
           << "," << binary_auroc_on(true) << "," << binary_auroc_on(false) << ","
           << multiclass_acc_on(true) << "," << multiclass_acc_on(false) << "\n";
    }
    write_text(p.root / "bench_arch.csv", os.str());
    std::cout << os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fault detection and diagnosis pipeline"};
    app.require_subcommand(1);

    std::string config_path, data_root, stream_input = "-";
    std::int64_t seed_override = -1;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--data-root", data_root, "artifact directory (or FDD_DATA_ROOT)");
    app.add_option("--seed", seed_override, "override config seed");

    const char* const cmds[] = {"simulate",       "split",          "train-tcae",
                                "extract",        "train-detector", "train-diagnoser",
                                "calibrate",      "calibrate-ood",  "evaluate",
                                "stream",         "bench-arch",     "bench-imbalance"};
    for (const auto* c : cmds) app.add_subcommand(c);
    app.get_subcommand("stream")->add_option("--input", stream_input,
                                             "trajectory file, or - for stdin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        PipelineConfig cfg;
        if (!config_path.empty())
            cfg = PipelineConfig::from_json(fdd::io::load_json(config_path));
        if (seed_override >= 0) {
            cfg.seed = static_cast<std::uint64_t>(seed_override);
            cfg.tcae_train.seed = cfg.seed;
        }
        if (const char* env = std::getenv("FDD_DATA_ROOT"); env && data_root.empty())
            data_root = env;
        if (!data_root.empty()) cfg.data_root = data_root;
        cfg.validate();

        Paths p{fs::path(cfg.data_root)};
        fs::create_directories(p.root);

        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "simulate") cmd_simulate(p, cfg);
        else if (cmd == "split") cmd_split(p, cfg);
        else if (cmd == "train-tcae") cmd_train_tcae(p, cfg);
        else if (cmd == "extract") cmd_extract(p, cfg);
        else if (cmd == "train-detector") cmd_train_detector(p, cfg);
        else if (cmd == "train-diagnoser") cmd_train_diagnoser(p, cfg);
        else if (cmd == "calibrate") cmd_calibrate(p, cfg);
        else if (cmd == "calibrate-ood") cmd_calibrate_ood(p, cfg);
        else if (cmd == "evaluate") return cmd_evaluate(p, cfg);
        else if (cmd == "stream") cmd_stream(p, cfg, stream_input);
        else if (cmd == "bench-arch") cmd_bench_arch(p, cfg);
        else if (cmd == "bench-imbalance") cmd_bench_imbalance(p, cfg);
        return 0;
    } catch (const fdd::io::VersionError& e) {
        std::cerr << "artifact version error: " << e.what() << "\n";
        return 3;
    } catch (const fdd::io::ArtifactError& e) {
        std::cerr << "artifact error: " << e.what() << "\n";
        return 3;
    } catch (const fdd::pipeline::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
