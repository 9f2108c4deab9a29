#pragma once

// Pipeline configuration and orchestration: artifact (de)serialization,
// feature extraction over window sets, the online detection loop, the
// end-to-end evaluation report, and the benchmark grids.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fdd/calib.hpp"
#include "fdd/common.hpp"
#include "fdd/data.hpp"
#include "fdd/detect.hpp"
#include "fdd/eval.hpp"
#include "fdd/gbt.hpp"
#include "fdd/io.hpp"
#include "fdd/ood.hpp"
#include "fdd/sim.hpp"
#include "fdd/tcae.hpp"

namespace fdd::pipeline {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline calib::Method parse_method(const std::string& s) {
    if (s == "identity") return calib::Method::Identity;
    if (s == "platt" || s == "sigmoid") return calib::Method::Platt;
    if (s == "isotonic") return calib::Method::Isotonic;
    throw ConfigError("unknown calibration method: " + s);
}

inline std::string method_name(calib::Method m) {
    switch (m) {
        case calib::Method::Identity: return "identity";
        case calib::Method::Platt: return "platt";
        case calib::Method::Isotonic: return "isotonic";
    }
    return "identity";
}

struct PipelineConfig {
    std::string data_root = "data";
    std::uint64_t seed = 7;

    // corpus
    int dev_per_class = 16;       // trajectories per class, development corpus
    int final_total = 0;          // optional prevalence-shifted corpus size
    bool include_t1 = false;
    int n_ood_per_class = 3;      // synthetic OOD trajectories per Table-8 class

    // windowing (train and inference step must match)
    int window = 100;
    int step = 10;

    tcae::TcaeConfig tcae;
    tcae::TrainOptions tcae_train;
    gbt::GbtConfig gbt_binary = gbt::GbtConfig::binary_default();
    gbt::GbtConfig gbt_multiclass = gbt::GbtConfig::multiclass_default();
    calib::Method calib_binary = calib::Method::Isotonic;
    calib::Method calib_multiclass = calib::Method::Isotonic;

    detect::CusumParams detector;
    double ood_alpha = 0.01;
    int ood_thr_cs = 100;

    // split ratios (trajectory level); calibration = val + val2
    double r_train = 0.6, r_val = 0.1, r_val2 = 0.1;

    // evaluate-mode CI gate: exit nonzero when FPR exceeds this
    double max_fpr = 1.0;

    void validate() const {
        if (window < 2 || step < 1) throw ConfigError("bad window/step");
        if (tcae.T != window) throw ConfigError("tcae.T must equal window");
        if (r_train + r_val + r_val2 >= 1.0) throw ConfigError("split ratios exceed 1");
        if (ood_alpha <= 0.0 || ood_alpha >= 1.0) throw ConfigError("ood_alpha out of range");
        if (detector.t_fp < 0.0 || detector.t_fp > 1.0) throw ConfigError("t_fp out of range");
        tcae.validate();
        gbt_binary.validate();
        gbt_multiclass.validate();
    }

    json to_json() const {
        json j;
        j["data_root"] = data_root;
        j["seed"] = seed;
        j["dev_per_class"] = dev_per_class;
        j["final_total"] = final_total;
        j["include_t1"] = include_t1;
        j["n_ood_per_class"] = n_ood_per_class;
        j["window"] = window;
        j["step"] = step;
        j["tcae"] = {{"L", tcae.L},       {"k", tcae.k},
                     {"n_filters", tcae.n_filters}, {"n_1x1", tcae.n_1x1},
                     {"c_latent", tcae.c_latent},   {"s", tcae.s},
                     {"dropout", tcae.dropout},     {"dilation_base", tcae.dilation_base},
                     {"abs_residual_mean", tcae.abs_residual_mean}};
        j["tcae_train"] = {{"lr", tcae_train.lr},
                           {"batch_size", tcae_train.batch_size},
                           {"max_epochs", tcae_train.max_epochs},
                           {"patience", tcae_train.patience}};
        auto gj = [](const gbt::GbtConfig& g) {
            return json{{"max_iter", g.max_iter},
                        {"max_depth", g.max_depth},
                        {"max_leaf_nodes", g.max_leaf_nodes},
                        {"min_samples_leaf", g.min_samples_leaf},
                        {"learning_rate", g.learning_rate},
                        {"l2_regularization", g.l2_regularization},
                        {"n_bins", g.n_bins}};
        };
        j["gbt_binary"] = gj(gbt_binary);
        j["gbt_multiclass"] = gj(gbt_multiclass);
        j["calib_binary"] = method_name(calib_binary);
        j["calib_multiclass"] = method_name(calib_multiclass);
        j["detector"] = {{"t_fp", detector.t_fp},
                         {"t_cs", detector.t_cs},
                         {"slack", detector.slack}};
        j["ood"] = {{"alpha", ood_alpha}, {"thr_cs", ood_thr_cs}};
        j["split"] = {{"train", r_train}, {"val", r_val}, {"val2", r_val2}};
        j["max_fpr"] = max_fpr;
        return j;
    }

    static PipelineConfig from_json(const json& j) {
        PipelineConfig c;
        try {
            auto get = [&](const char* key, auto dflt) {
                using T = decltype(dflt);
                return j.contains(key) ? j.at(key).get<T>() : dflt;
            };
            c.data_root = get("data_root", std::string("data"));
            c.seed = get("seed", std::uint64_t{7});
            c.dev_per_class = get("dev_per_class", 16);
            c.final_total = get("final_total", 0);
            c.include_t1 = get("include_t1", false);
            c.n_ood_per_class = get("n_ood_per_class", 3);
            c.window = get("window", 100);
            c.step = get("step", 10);
            if (j.contains("tcae")) {
                const auto& t = j.at("tcae");
                auto tg = [&](const char* key, auto dflt) {
                    using T = decltype(dflt);
                    return t.contains(key) ? t.at(key).get<T>() : dflt;
                };
                c.tcae.L = tg("L", 0);
                c.tcae.k = tg("k", 9);
                c.tcae.n_filters = tg("n_filters", 64);
                c.tcae.n_1x1 = tg("n_1x1", 16);
                c.tcae.c_latent = tg("c_latent", 16);
                c.tcae.s = tg("s", 4);
                c.tcae.dropout = tg("dropout", 0.12);
                c.tcae.dilation_base = tg("dilation_base", 2);
                c.tcae.abs_residual_mean = tg("abs_residual_mean", false);
            }
            c.tcae.T = c.window;
            c.tcae.c = sim::kNumChannels;
            if (j.contains("tcae_train")) {
                const auto& t = j.at("tcae_train");
                auto tg = [&](const char* key, auto dflt) {
                    using T = decltype(dflt);
                    return t.contains(key) ? t.at(key).get<T>() : dflt;
                };
                c.tcae_train.lr = tg("lr", 1e-3);
                c.tcae_train.batch_size = tg("batch_size", 4096);
                c.tcae_train.max_epochs = tg("max_epochs", 200);
                c.tcae_train.patience = tg("patience", 20);
            }
            auto gload = [&](const char* key, gbt::GbtConfig g) {
                if (!j.contains(key)) return g;
                const auto& t = j.at(key);
                auto tg = [&](const char* k2, auto dflt) {
                    using T = decltype(dflt);
                    return t.contains(k2) ? t.at(k2).get<T>() : dflt;
                };
                g.max_iter = tg("max_iter", g.max_iter);
                g.max_depth = tg("max_depth", g.max_depth);
                g.max_leaf_nodes = tg("max_leaf_nodes", g.max_leaf_nodes);
                g.min_samples_leaf = tg("min_samples_leaf", g.min_samples_leaf);
                g.learning_rate = tg("learning_rate", g.learning_rate);
                g.l2_regularization = tg("l2_regularization", g.l2_regularization);
                g.n_bins = tg("n_bins", g.n_bins);
                return g;
            };
            c.gbt_binary = gload("gbt_binary", gbt::GbtConfig::binary_default());
            c.gbt_multiclass = gload("gbt_multiclass", gbt::GbtConfig::multiclass_default());
            c.calib_binary = parse_method(get("calib_binary", std::string("isotonic")));
            c.calib_multiclass = parse_method(get("calib_multiclass", std::string("isotonic")));
            if (j.contains("detector")) {
                const auto& d = j.at("detector");
                c.detector.t_fp = d.value("t_fp", 0.75);
                c.detector.t_cs = d.value("t_cs", 4.0);
                c.detector.slack = d.value("slack", 0.02);
            }
            if (j.contains("ood")) {
                c.ood_alpha = j.at("ood").value("alpha", 0.01);
                c.ood_thr_cs = j.at("ood").value("thr_cs", 100);
            }
            if (j.contains("split")) {
                c.r_train = j.at("split").value("train", 0.6);
                c.r_val = j.at("split").value("val", 0.1);
                c.r_val2 = j.at("split").value("val2", 0.1);
            }
            c.max_fpr = get("max_fpr", 1.0);
            c.tcae_train.seed = c.seed;
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        c.validate();
        return c;
    }

    // data_root is a runtime location, not part of the modeling config
    std::uint64_t hash() const {
        auto j = to_json();
        j.erase("data_root");
        return fnv1a64(j.dump());
    }
    std::string hash_hex() const { return hex64(hash()); }
};

// ---- feature extraction ----

struct FeatureRow {
    std::vector<float> z;
    std::vector<float> r;
    float e = 0.0f;
    int label = 0;
    sim::TrajType traj_type = sim::TrajType::T2;
    std::int64_t traj_id = 0;
    std::int64_t start_index = 0;
};

inline FeatureRow to_row(const tcae::Features& f, const data::Window& w) {
    FeatureRow row;
    row.z.assign(f.z.begin(), f.z.end());
    row.r.assign(f.r.begin(), f.r.end());
    row.e = static_cast<float>(f.e);
    row.label = w.label;
    row.traj_type = w.traj_type;
    row.traj_id = w.traj_id;
    row.start_index = w.start_index;
    return row;
}

inline std::vector<FeatureRow> extract_features(tcae::TcaeModel& model,
                                                const std::vector<data::Window>& windows) {
    std::vector<FeatureRow> out;
    out.reserve(windows.size());
    for (const auto& w : windows)
        out.push_back(to_row(model.infer(w.values), w));
    return out;
}

inline std::vector<std::vector<float>> feature_matrix(
    const std::vector<FeatureRow>& rows, bool use_latent) {
    std::vector<std::vector<float>> x;
    x.reserve(rows.size());
    for (const auto& r : rows) x.push_back(use_latent ? r.z : r.r);
    return x;
}

// ---- artifact serialization ----

inline void save_tcae(tcae::TcaeModel& model, const std::string& path,
                      const std::string& config_hash) {
    json meta;
    meta["config_hash"] = config_hash;
    meta["scaler_hash"] = hex64(model.scaler_hash);
    meta["channels"] = sim::channel_names();
    meta["trained_epochs"] = model.trained_epochs;
    meta["loss_curve"] = model.loss_curve;
    meta["tcae"] = {{"T", model.cfg.T},       {"c", model.cfg.c},
                    {"L", model.cfg.L},       {"k", model.cfg.k},
                    {"n_filters", model.cfg.n_filters},
                    {"n_1x1", model.cfg.n_1x1},
                    {"c_latent", model.cfg.c_latent},
                    {"s", model.cfg.s},
                    {"dropout", model.cfg.dropout},
                    {"dilation_base", model.cfg.dilation_base},
                    {"abs_residual_mean", model.cfg.abs_residual_mean}};
    std::vector<io::NamedTensor> tensors;
    int idx = 0;
    for (auto& p : model.params()) {
        io::NamedTensor t;
        t.name = std::string(p.name) + "." + std::to_string(idx++);
        t.data.assign(p.w->begin(), p.w->end());
        tensors.push_back(std::move(t));
    }
    io::save_container(path, "tcae", std::move(meta), tensors);
}

inline tcae::TcaeModel load_tcae(const std::string& path,
                                 const std::string& expected_config_hash) {
    auto c = io::load_container(path, "tcae");
    if (!expected_config_hash.empty() &&
        c.meta.at("config_hash").get<std::string>() != expected_config_hash)
        throw io::VersionError("tcae artifact was built with a different config");
    const auto& t = c.meta.at("tcae");
    tcae::TcaeConfig cfg;
    cfg.T = t.at("T").get<int>();
    cfg.c = t.at("c").get<int>();
    cfg.L = t.at("L").get<int>();
    cfg.k = t.at("k").get<int>();
    cfg.n_filters = t.at("n_filters").get<int>();
    cfg.n_1x1 = t.at("n_1x1").get<int>();
    cfg.c_latent = t.at("c_latent").get<int>();
    cfg.s = t.at("s").get<int>();
    cfg.dropout = t.at("dropout").get<double>();
    cfg.dilation_base = t.at("dilation_base").get<int>();
    cfg.abs_residual_mean = t.at("abs_residual_mean").get<bool>();
    tcae::TcaeModel model(cfg, 0);
    model.scaler_hash = std::stoull(c.meta.at("scaler_hash").get<std::string>(), nullptr, 16);
    model.trained_epochs = c.meta.value("trained_epochs", 0);
    auto ps = model.params();
    if (ps.size() != c.tensors.size())
        throw io::ArtifactError("tcae tensor count mismatch");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (c.tensors[i].data.size() != ps[i].w->size())
            throw io::ArtifactError("tcae tensor size mismatch: " + c.tensors[i].name);
        ps[i].w->assign(c.tensors[i].data.begin(), c.tensors[i].data.end());
    }
    return model;
}

inline void save_gbt(const gbt::GbtEnsemble& model, const std::string& path,
                     const std::string& config_hash) {
    json meta;
    meta["config_hash"] = config_hash;
    meta["n_features"] = model.n_features;
    meta["n_classes"] = model.n_classes;
    meta["class_labels"] = model.class_labels;
    meta["base_score"] = model.base_score;
    meta["bin_edges"] = model.bin_edges;
    meta["cfg"] = {{"max_iter", model.cfg.max_iter},
                   {"max_depth", model.cfg.max_depth},
                   {"max_leaf_nodes", model.cfg.max_leaf_nodes},
                   {"min_samples_leaf", model.cfg.min_samples_leaf},
                   {"learning_rate", model.cfg.learning_rate},
                   {"l2_regularization", model.cfg.l2_regularization},
                   {"n_bins", model.cfg.n_bins}};
    json trees = json::array();
    for (const auto& iter : model.trees) {
        json it = json::array();
        for (const auto& tree : iter) {
            json nodes = json::array();
            for (const auto& nd : tree.nodes)
                nodes.push_back({nd.feature, nd.bin_threshold, nd.left, nd.right, nd.value});
            it.push_back(std::move(nodes));
        }
        trees.push_back(std::move(it));
    }
    meta["trees"] = std::move(trees);
    io::save_container(path, "gbt", std::move(meta), {});
}

inline gbt::GbtEnsemble load_gbt(const std::string& path,
                                 const std::string& expected_config_hash) {
    auto c = io::load_container(path, "gbt");
    if (!expected_config_hash.empty() &&
        c.meta.at("config_hash").get<std::string>() != expected_config_hash)
        throw io::VersionError("gbt artifact was built with a different config");
    gbt::GbtEnsemble m;
    m.n_features = c.meta.at("n_features").get<int>();
    m.n_classes = c.meta.at("n_classes").get<int>();
    m.class_labels = c.meta.at("class_labels").get<std::vector<int>>();
    m.base_score = c.meta.at("base_score").get<std::vector<double>>();
    m.bin_edges = c.meta.at("bin_edges").get<std::vector<std::vector<double>>>();
    const auto& g = c.meta.at("cfg");
    m.cfg.max_iter = g.at("max_iter").get<int>();
    m.cfg.max_depth = g.at("max_depth").get<int>();
    m.cfg.max_leaf_nodes = g.at("max_leaf_nodes").get<int>();
    m.cfg.min_samples_leaf = g.at("min_samples_leaf").get<double>();
    m.cfg.learning_rate = g.at("learning_rate").get<double>();
    m.cfg.l2_regularization = g.at("l2_regularization").get<double>();
    m.cfg.n_bins = g.at("n_bins").get<int>();
    for (const auto& it : c.meta.at("trees")) {
        std::vector<gbt::Tree> iteration;
        for (const auto& tj : it) {
            gbt::Tree tree;
            for (const auto& nj : tj) {
                gbt::TreeNode nd;
                nd.feature = nj[0].get<int>();
                nd.bin_threshold = nj[1].get<int>();
                nd.left = nj[2].get<int>();
                nd.right = nj[3].get<int>();
                nd.value = nj[4].get<double>();
                tree.nodes.push_back(nd);
            }
            iteration.push_back(std::move(tree));
        }
        m.trees.push_back(std::move(iteration));
    }
    return m;
}

inline json calibrator_to_json(const calib::Calibrator& c) {
    json j;
    j["kind"] = method_name(c.kind);
    j["a"] = c.a;
    j["b"] = c.b;
    j["breakpoints"] = c.breakpoints;
    j["values"] = c.values;
    return j;
}

inline calib::Calibrator calibrator_from_json(const json& j) {
    calib::Calibrator c;
    c.kind = parse_method(j.at("kind").get<std::string>());
    c.a = j.at("a").get<double>();
    c.b = j.at("b").get<double>();
    c.breakpoints = j.at("breakpoints").get<std::vector<double>>();
    c.values = j.at("values").get<std::vector<double>>();
    return c;
}

// ---- the assembled pipeline ----

struct Pipeline {
    PipelineConfig cfg;
    data::Scaler scaler;
    tcae::TcaeModel autoencoder;
    gbt::GbtEnsemble detector_gbt;   // binary, on z
    gbt::GbtEnsemble diagnoser_gbt;  // multiclass, on r
    calib::Calibrator binary_calibrator;
    calib::MulticlassCalibrator multiclass_calibrator;
    ood::ConformalThreshold conformal;
};

struct TriggerEvent {
    std::int64_t traj_id = 0;
    double time_s = 0.0;
    double probability = 0.0;
    int diagnosed_class = 0;
    double diagnosis_confidence = 0.0;
};

struct TrajectoryResult {
    std::int64_t traj_id = 0;
    int label = 0;
    sim::TrajType traj_type = sim::TrajType::T2;
    std::optional<TriggerEvent> trigger;
    bool ood_warned = false;
    int n_ood_windows = 0;
    std::size_t n_windows = 0;
    // window-level probabilities for calibration metrics
    std::vector<double> binary_probs;
    std::vector<std::vector<double>> multiclass_probs;
};

inline double calibrated_fault_probability(const Pipeline& p,
                                           const FeatureRow& row) {
    auto proba = p.detector_gbt.predict_proba(row.z);
    return clamp01(p.binary_calibrator.apply(proba[1]));
}

inline std::pair<int, double> diagnose(const Pipeline& p, const FeatureRow& row) {
    auto scores = p.diagnoser_gbt.predict_proba(row.r);
    auto calibrated = p.multiclass_calibrator.apply(scores);
    std::size_t am = 0;
    for (std::size_t i = 1; i < calibrated.size(); ++i)
        if (calibrated[i] > calibrated[am]) am = i;
    return {p.diagnoser_gbt.class_labels[am], calibrated[am]};
}

// Runs one trajectory through the online loop. OOD warnings never halt the
// detection path; diagnosis runs only on the triggering window.
inline TrajectoryResult run_trajectory(Pipeline& p, const sim::Trajectory& traj,
                                       bool keep_probs = false) {
    TrajectoryResult res;
    res.traj_id = traj.id;
    res.label = traj.label;
    res.traj_type = traj.traj_type;

    auto wins = data::windows(traj, p.scaler, p.cfg.window, p.cfg.step);
    res.n_windows = wins.size();
    detect::CusumState cusum(p.cfg.detector);
    ood::OodTrajectoryState ostate;
    ostate.thr_ood_cs = p.cfg.ood_thr_cs;

    for (const auto& w : wins) {
        FeatureRow row = to_row(p.autoencoder.infer(w.values), w);
        double prob = calibrated_fault_probability(p, row);
        if (keep_probs) res.binary_probs.push_back(prob);

        ostate.step(ood::is_ood(p.conformal, row.e));

        if (!cusum.triggered()) {
            cusum.step(prob);
            if (cusum.triggered()) {
                auto [cls, conf] = diagnose(p, row);
                TriggerEvent ev;
                ev.traj_id = traj.id;
                ev.time_s = static_cast<double>(w.start_index) / traj.sample_rate +
                            static_cast<double>(p.cfg.window) / traj.sample_rate;
                ev.probability = prob;
                ev.diagnosed_class = cls;
                ev.diagnosis_confidence = conf;
                res.trigger = ev;
            }
        }
        if (keep_probs) {
            auto scores = p.diagnoser_gbt.predict_proba(row.r);
            res.multiclass_probs.push_back(p.multiclass_calibrator.apply(scores));
        }
    }
    res.ood_warned = ostate.warned;
    res.n_ood_windows = ostate.n_ood;
    return res;
}

// ---- evaluation report ----

inline bool is_ood_label(int label) { return label >= 20 && label <= 22; }

struct CalibrationRow {
    int n_bins = 5;
    double ece = 0.0, mce = 0.0;
};

struct EvalReport {
    eval::BinaryMetrics fault_detection;
    eval::ConfusionMatrix diagnosis{{16, 128, 511}};
    eval::BinaryMetrics ood_detection;
    double window_auroc_binary = 0.0;
    std::map<std::pair<int, int>, eval::Stats> detection_times; // (class, type)
    std::vector<CalibrationRow> binary_calibration;             // bins sweep
    double binary_brier = 0.0;
    calib::ReliabilityData binary_reliability;
    std::vector<TrajectoryResult> per_trajectory;

    std::string to_text() const {
        std::ostringstream os;
        os << std::fixed << std::setprecision(4);
        os << "== fault detection (trajectory level) ==\n";
        os << "tp " << fault_detection.tp << " fp " << fault_detection.fp
           << " tn " << fault_detection.tn << " fn " << fault_detection.fn << "\n";
        os << "fpr " << fault_detection.fpr() << " fnr " << fault_detection.fnr()
           << " accuracy " << fault_detection.accuracy() << "\n";
        os << "precision " << fault_detection.precision() << " recall "
           << fault_detection.recall() << " f1 " << fault_detection.f1() << "\n";
        os << "window-level binary AUROC " << window_auroc_binary << "\n";
        os << "\n== diagnosis (true faults only) ==\n";
        os << "accuracy " << diagnosis.accuracy() << "\n";
        for (std::size_t i = 0; i < diagnosis.labels.size(); ++i) {
            os << "true " << std::setw(4) << diagnosis.labels[i] << ":";
            for (std::size_t j = 0; j < diagnosis.labels.size(); ++j)
                os << " " << diagnosis.counts[i][j];
            os << "\n";
        }
        os << "\n== OOD detection (trajectory level) ==\n";
        os << "tp " << ood_detection.tp << " fp " << ood_detection.fp << " tn "
           << ood_detection.tn << " fn " << ood_detection.fn << "\n";
        os << "fpr " << ood_detection.fpr() << " recall " << ood_detection.recall()
           << " f1 " << ood_detection.f1() << "\n";
        os << "\n== detection times (s) per class and trajectory type ==\n";
        for (const auto& [key, st] : detection_times) {
            os << "class " << std::setw(4) << key.first << " T" << key.second
               << ": n " << st.count << " min " << st.min << " max " << st.max
               << " mean " << st.mean << " std " << st.stddev << "\n";
        }
        os << "\n== binary calibration ==\n";
        os << "brier " << binary_brier << "\n";
        for (const auto& row : binary_calibration)
            os << "bins " << std::setw(2) << row.n_bins << ": ece " << row.ece
               << " mce " << row.mce << "\n";
        return os.str();
    }

    std::string reliability_csv() const {
        std::ostringstream os;
        os << std::setprecision(10);
        os << "bin,mean_predicted,frac_positive,mass\n";
        int i = 0;
        for (const auto& b : binary_reliability.bins)
            os << i++ << "," << b.mean_predicted << "," << b.frac_positive << ","
               << b.mass << "\n";
        return os.str();
    }

    // mean diagnosis confidence grouped by (correct, class, trajectory type)
    std::string confidence_csv() const {
        std::map<std::tuple<int, int, int>, std::pair<double, int>> groups;
        for (const auto& r : per_trajectory) {
            if (!r.trigger || r.label == 0 || is_ood_label(r.label)) continue;
            int correct = r.trigger->diagnosed_class == r.label ? 1 : 0;
            auto key = std::make_tuple(correct, r.label, static_cast<int>(r.traj_type));
            auto& [sum, cnt] = groups[key];
            sum += r.trigger->diagnosis_confidence;
            ++cnt;
        }
        std::ostringstream os;
        os << std::setprecision(10);
        os << "correct,label,traj_type,n,mean_confidence\n";
        for (const auto& [key, agg] : groups)
            os << std::get<0>(key) << "," << std::get<1>(key) << ","
               << std::get<2>(key) << "," << agg.second << ","
               << agg.first / agg.second << "\n";
        return os.str();
    }

    std::string events_csv() const {
        std::ostringstream os;
        os << std::setprecision(10);
        os << "traj_id,label,traj_type,trigger_time_s,probability,diagnosed_class,"
              "diagnosis_confidence,ood_warned,n_ood_windows\n";
        for (const auto& r : per_trajectory) {
            os << r.traj_id << "," << r.label << "," << static_cast<int>(r.traj_type) << ",";
            if (r.trigger)
                os << r.trigger->time_s << "," << r.trigger->probability << ","
                   << r.trigger->diagnosed_class << "," << r.trigger->diagnosis_confidence;
            else
                os << ",,,";
            os << "," << (r.ood_warned ? 1 : 0) << "," << r.n_ood_windows << "\n";
        }
        return os.str();
    }
};

inline EvalReport evaluate_pipeline(Pipeline& p,
                                    const std::vector<sim::Trajectory>& trajectories) {
    EvalReport rep;
    std::vector<double> all_probs;
    std::vector<int> all_binary_labels;
    std::map<std::pair<int, int>, std::vector<double>> detection_buckets;

    for (const auto& traj : trajectories) {
        auto res = run_trajectory(p, traj, true);
        bool truth_ood = is_ood_label(traj.label);
        rep.ood_detection.add(truth_ood, res.ood_warned);

        if (!truth_ood) {
            bool truth_fault = traj.label != 0;
            bool pred_fault = res.trigger.has_value();
            rep.fault_detection.add(truth_fault, pred_fault);
            if (truth_fault && pred_fault) {
                rep.diagnosis.add(traj.label, res.trigger->diagnosed_class);
            }
            if (pred_fault) {
                auto key = std::make_pair(traj.label, static_cast<int>(traj.traj_type));
                detection_buckets[key].push_back(res.trigger->time_s);
            }
            for (std::size_t i = 0; i < res.binary_probs.size(); ++i) {
                all_probs.push_back(res.binary_probs[i]);
                all_binary_labels.push_back(truth_fault ? 1 : 0);
            }
        }
        rep.per_trajectory.push_back(std::move(res));
    }

    for (auto& [key, times] : detection_buckets) {
        std::sort(times.begin(), times.end());
        rep.detection_times[key] = eval::Stats::of(times);
    }

    if (!all_probs.empty()) {
        bool both = false, first_set = false;
        int first = 0;
        for (int y : all_binary_labels) {
            if (!first_set) {
                first = y;
                first_set = true;
            } else if (y != first) {
                both = true;
                break;
            }
        }
        if (both) {
            rep.window_auroc_binary = eval::auroc(all_probs, all_binary_labels);
            for (int bins : {5, 10, 15, 20}) {
                auto rd = calib::reliability(all_probs, all_binary_labels, bins);
                rep.binary_calibration.push_back({bins, calib::ece(rd), calib::mce(rd)});
            }
            rep.binary_reliability = calib::reliability(all_probs, all_binary_labels, 5);
            rep.binary_brier = calib::brier(all_probs, all_binary_labels);
        }
    }
    return rep;
}

// ---- imbalance benchmark (Table-6 style grid) ----

struct ImbalanceRow {
    std::string method;
    double auroc = 0.0, precision = 0.0, recall = 0.0, accuracy = 0.0;
    // calibration metrics: [base, platt, isotonic]
    double ece[3] = {0, 0, 0};
    double mce[3] = {0, 0, 0};
    double mse[3] = {0, 0, 0};
    calib::ReliabilityData reliability_base;
};

struct ImbalanceBench {
    std::vector<ImbalanceRow> rows;

    std::string to_csv() const {
        std::ostringstream os;
        os << std::setprecision(10);
        os << "method,auroc,precision,recall,accuracy,"
              "ece_base,mce_base,mse_base,ece_platt,mce_platt,mse_platt,"
              "ece_isotonic,mce_isotonic,mse_isotonic\n";
        for (const auto& r : rows) {
            os << r.method << "," << r.auroc << "," << r.precision << ","
               << r.recall << "," << r.accuracy;
            for (int c = 0; c < 3; ++c)
                os << "," << r.ece[c] << "," << r.mce[c] << "," << r.mse[c];
            os << "\n";
        }
        return os.str();
    }
};

// Binary imbalance grid on precomputed features. `x_*` are feature matrices,
// `y_*` binary labels (0 nominal / 1 fault).
inline ImbalanceBench benchmark_imbalance(
    const std::vector<std::vector<float>>& x_train, const std::vector<int>& y_train,
    const std::vector<std::vector<float>>& x_cal, const std::vector<int>& y_cal,
    const std::vector<std::vector<float>>& x_test, const std::vector<int>& y_test,
    const gbt::GbtConfig& cfg, double moved_threshold, std::uint64_t seed) {
    ImbalanceBench bench;

    auto eval_model = [&](const std::string& name, const gbt::GbtEnsemble& model,
                          double threshold) {
        ImbalanceRow row;
        row.method = name;
        std::vector<double> s_test(x_test.size()), s_cal(x_cal.size());
        for (std::size_t i = 0; i < x_test.size(); ++i)
            s_test[i] = model.predict_proba(x_test[i])[1];
        for (std::size_t i = 0; i < x_cal.size(); ++i)
            s_cal[i] = model.predict_proba(x_cal[i])[1];

        row.auroc = eval::auroc(s_test, y_test);
        eval::BinaryMetrics m;
        for (std::size_t i = 0; i < s_test.size(); ++i)
            m.add(y_test[i] != 0, s_test[i] > threshold);
        row.precision = m.precision();
        row.recall = m.recall();
        row.accuracy = m.accuracy();

        calib::Calibrator maps[3] = {
            calib::Calibrator{},
            calib::fit_platt(s_cal, y_cal),
            calib::fit_isotonic(s_cal, y_cal),
        };
        for (int c = 0; c < 3; ++c) {
            std::vector<double> p(s_test.size());
            for (std::size_t i = 0; i < s_test.size(); ++i)
                p[i] = clamp01(maps[c].apply(s_test[i]));
            auto rd = calib::reliability(p, y_test, 5);
            row.ece[c] = calib::ece(rd);
            row.mce[c] = calib::mce(rd);
            row.mse[c] = calib::brier(p, y_test);
            if (c == 0) row.reliability_base = rd;
        }
        return row;
    };

    // base
    auto base_model = gbt::fit(x_train, y_train, {}, cfg);
    bench.rows.push_back(eval_model("base", base_model, 0.5));

    // class weighting
    {
        auto w_by_class = data::class_weights(y_train);
        std::vector<double> w(y_train.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = w_by_class[y_train[i]];
        auto m = gbt::fit(x_train, y_train, w, cfg);
        bench.rows.push_back(eval_model("weighting", m, 0.5));
    }

    // resamplers
    const std::pair<data::ResampleMethod, const char*> methods[] = {
        {data::ResampleMethod::ROS, "ros"},
        {data::ResampleMethod::RUS, "rus"},
        {data::ResampleMethod::SMOTE, "smote"},
    };
    for (auto [method, name] : methods) {
        auto rs = data::resample(x_train, y_train, method, seed);
        auto m = gbt::fit(rs.x, rs.y, {}, cfg);
        bench.rows.push_back(eval_model(name, m, 0.5));
    }

    // threshold moving reuses the base model's scores
    bench.rows.push_back(eval_model("threshold_moving", base_model, moved_threshold));
    return bench;
}

} // namespace fdd::pipeline
