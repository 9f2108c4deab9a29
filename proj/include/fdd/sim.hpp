#pragma once

// Synthetic valve/motor trajectory generator.
//
// The plant is a deliberately small dq-frame PMSM model driving a valve
// through a gear, with a cascaded PI control stack (position -> speed ->
// current) running at the 1 kHz sample rate and an inner Euler integration
// loop for the electrical dynamics. Nine physical parameters can each be
// nominal or anomalous; the 9-bit fault label encodes which ones are
// anomalous.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdd/common.hpp"

namespace fdd::sim {

inline constexpr int kNumChannels = 14;
inline constexpr double kSampleRate = 1000.0;

inline const std::array<std::string, kNumChannels>& channel_names() {
    static const std::array<std::string, kNumChannels> names = {
        "Vd_Ref",      "Vq_Ref",      "Ws",          "Iq_Ref",
        "Id_Meas",     "Iq_Meas",     "PosM_Set",    "PosM_Ref",
        "PosM_Meas",   "SpeedM_Ref",  "SpeedM_Meas", "TqM_Ref",
        "PosV_Set",    "PosV_Meas"};
    return names;
}

enum class TrajType : int { T1 = 1, T2 = 2, T3 = 3 };

inline double default_duration(TrajType t) {
    switch (t) {
        case TrajType::T1: return 60.0;
        case TrajType::T2: return 5.0;
        case TrajType::T3: return 15.0;
    }
    throw std::invalid_argument("unknown trajectory type");
}

// All nine simulation inputs, expressed on the scales of the fault table
// below (mostly percent-of-nominal scale factors; see ParamRange).
struct PhysicalParams {
    double main_flux = 100.0;
    double mean_inductance = 100.0;
    double saliency = 1.0;
    double resistance = 125.0;
    double inertia = 100.0;
    double friction = 50.0;
    double dry_friction = 50.0;
    double load_torque = 50.0;
    double unbalance = 1.0;

    double& field(int i) {
        switch (i) {
            case 0: return main_flux;
            case 1: return mean_inductance;
            case 2: return saliency;
            case 3: return resistance;
            case 4: return inertia;
            case 5: return friction;
            case 6: return dry_friction;
            case 7: return load_torque;
            case 8: return unbalance;
        }
        throw std::out_of_range("PhysicalParams::field");
    }
    double field(int i) const {
        return const_cast<PhysicalParams*>(this)->field(i);
    }
};

struct Interval {
    double lo, hi;
    bool contains(double v) const { return v >= lo && v <= hi; }
    double width() const { return hi - lo; }
};

// Nominal / anomalous ranges per input; label bit b corresponds to field b.
struct ParamRange {
    const char* name;
    Interval nominal;
    Interval anom_a;
    Interval anom_b;    // width 0 when the anomalous range is one interval
    bool has_b;
};

inline const std::array<ParamRange, 9>& param_ranges() {
    static const std::array<ParamRange, 9> r = {{
        {"main_flux",       {90, 110}, {75, 85},  {115, 125}, true},
        {"mean_inductance", {90, 110}, {75, 85},  {115, 125}, true},
        {"saliency",        {0, 3},    {5, 10},   {0, 0},     false},
        {"resistance",      {100, 150},{50, 90},  {160, 200}, true},
        {"inertia",         {90, 110}, {50, 80},  {120, 150}, true},
        {"friction",        {0, 110},  {125, 200},{0, 0},     false},
        {"dry_friction",    {0, 110},  {125, 200},{0, 0},     false},
        {"load_torque",     {0, 110},  {125, 200},{0, 0},     false},
        {"unbalance",       {0, 2},    {5, 20},   {0, 0},     false},
    }};
    return r;
}

inline bool param_in_anomalous(int i, double v) {
    const auto& r = param_ranges()[static_cast<std::size_t>(i)];
    return r.anom_a.contains(v) || (r.has_b && r.anom_b.contains(v));
}

inline bool param_in_nominal(int i, double v) {
    return param_ranges()[static_cast<std::size_t>(i)].nominal.contains(v);
}

inline bool params_valid(const PhysicalParams& p) {
    for (int i = 0; i < 9; ++i) {
        double v = p.field(i);
        if (!param_in_nominal(i, v) && !param_in_anomalous(i, v)) return false;
    }
    return true;
}

// 9-bit fault label from range membership; bit b set iff field b anomalous.
inline int label_of(const PhysicalParams& p) {
    int label = 0;
    for (int i = 0; i < 9; ++i)
        if (param_in_anomalous(i, p.field(i))) label |= (1 << i);
    return label;
}

struct Trajectory {
    std::vector<std::vector<float>> channels;  // [kNumChannels][n_samples]
    double sample_rate = kSampleRate;
    int label = 0;
    TrajType traj_type = TrajType::T2;
    std::int64_t id = 0;

    std::size_t length() const { return channels.empty() ? 0 : channels[0].size(); }
};

// Draw one parameter set for a fault label. Nominal bits sample the nominal
// interval; anomalous bits sample the anomalous union, sub-interval picked
// with probability proportional to width.
inline PhysicalParams sample_params(int label, Rng& rng) {
    if (label < 0 || label > 511)
        throw std::invalid_argument("sample_params: label out of range");
    PhysicalParams p;
    for (int i = 0; i < 9; ++i) {
        const auto& r = param_ranges()[static_cast<std::size_t>(i)];
        if (label & (1 << i)) {
            if (r.has_b) {
                double wa = r.anom_a.width(), wb = r.anom_b.width();
                const Interval& iv =
                    (rng.uniform() * (wa + wb) < wa) ? r.anom_a : r.anom_b;
                p.field(i) = rng.uniform(iv.lo, iv.hi);
            } else {
                p.field(i) = rng.uniform(r.anom_a.lo, r.anom_a.hi);
            }
        } else {
            p.field(i) = rng.uniform(r.nominal.lo, r.nominal.hi);
        }
    }
    return p;
}

inline PhysicalParams sample_params(int label, std::uint64_t seed) {
    Rng rng(seed);
    return sample_params(label, rng);
}

// Valve set-point profiles in degrees.
inline double setpoint_deg(TrajType t, double time_s, double duration_s) {
    switch (t) {
        case TrajType::T1: {
            // long multi-step hold
            double t1 = 0.05 * duration_s, t2 = 0.45 * duration_s;
            double t3 = 0.55 * duration_s, t4 = 0.92 * duration_s;
            if (time_s < t1) return 0.0;
            if (time_s < t2) return 150.0;
            if (time_s < t3) return 80.0;
            if (time_s < t4) return 80.0;
            return 0.0;
        }
        case TrajType::T2: {
            // single open-close
            if (time_s < 0.1 * duration_s) return 0.0;
            if (time_s < 0.6 * duration_s) return 200.0;
            return 0.0;
        }
        case TrajType::T3: {
            // staircase up then down
            int n_steps = 8;
            double step_t = duration_s / n_steps;
            int k = static_cast<int>(time_s / step_t);
            if (k >= n_steps) k = n_steps - 1;
            int up = n_steps / 2;
            double lvl = (k < up) ? k + 1 : n_steps - 1 - k;
            return 50.0 * lvl;
        }
    }
    throw std::invalid_argument("unknown trajectory type");
}

namespace detail {

// Base plant values; the percent-scale parameters multiply these.
struct PlantBase {
    double flux = 0.10;        // Wb
    double inductance = 0.006; // H
    double resistance = 0.60;  // Ohm
    double inertia = 0.0025;   // kg.m^2
    double friction = 0.0010;  // N.m.s
    double dry_friction = 0.020; // N.m
    double load_torque = 0.15; // N.m
    double unbalance_tq = 0.004; // N.m per unit of unbalance percent
};

struct Limits {
    double volt = 48.0;
    double current = 25.0;
    double torque = 6.0;
    double speed = 60.0;      // rad/s mechanical
    double slew = 400.0;      // deg/s valve reference slew rate
};

inline double clamp(double v, double lim) {
    return v > lim ? lim : (v < -lim ? -lim : v);
}

} // namespace detail

// Per-channel plausible full-scale ranges used for the 1% measurement noise.
inline const std::array<double, kNumChannels>& channel_scale() {
    static const std::array<double, kNumChannels> s = {
        96.0,  96.0,  600.0, 50.0, 50.0, 50.0, 40.0,
        40.0,  40.0,  120.0, 120.0, 12.0, 220.0, 220.0};
    return s;
}

inline Trajectory simulate(const PhysicalParams& params, TrajType traj_type,
                           double duration_s, std::uint64_t seed) {
    if (duration_s <= 0.0)
        throw std::invalid_argument("simulate: duration must be positive");
    if (!params_valid(params))
        throw std::invalid_argument("simulate: parameter out of range");

    const detail::PlantBase base;
    const detail::Limits lim;

    const double flux = base.flux * params.main_flux / 100.0;
    const double ld = base.inductance * params.mean_inductance / 100.0;
    const double lq = ld * (1.0 + params.saliency / 100.0);
    const double res = base.resistance * params.resistance / 100.0;
    const double inertia = base.inertia * params.inertia / 100.0;
    const double visc = base.friction * params.friction / 100.0;
    const double dry = base.dry_friction * params.dry_friction / 100.0;
    const double tau_load = base.load_torque * params.load_torque / 100.0;
    const double tau_unb = base.unbalance_tq * params.unbalance;

    const int pole_pairs = 4;
    const double gear = 10.0;       // motor rad per valve rad
    const double deg2mrad = M_PI / 180.0 * gear;

    // Controller gains assume nominal plant values.
    const double kp_pos = 18.0, ki_pos = 2.0;
    const double kp_spd = 0.9, ki_spd = 14.0;
    const double kp_cur = 8.0, ki_cur = 900.0;
    const double flux_nom = base.flux; // torque constant the controller assumes
    const double kt_ctl = 1.5 * pole_pairs * flux_nom;

    const int n = static_cast<int>(std::llround(duration_s * kSampleRate));
    const double dt = 1.0 / kSampleRate;
    const int substeps = 20;
    const double h = dt / substeps;

    Trajectory traj;
    traj.channels.assign(kNumChannels, std::vector<float>());
    for (auto& c : traj.channels) c.reserve(static_cast<std::size_t>(n));
    traj.label = label_of(params);
    traj.traj_type = traj_type;

    Rng rng(seed);

    // plant state
    double theta = 0.0, omega = 0.0, id = 0.0, iq = 0.0;
    // controller state
    double pos_ref_deg = 0.0;
    double int_pos = 0.0, int_spd = 0.0, int_id = 0.0, int_iq = 0.0;

    for (int i = 0; i < n; ++i) {
        const double t = i * dt;
        const double set_deg = setpoint_deg(traj_type, t, duration_s);

        // slew-limited position reference
        double dref = set_deg - pos_ref_deg;
        double max_step = lim.slew * dt;
        pos_ref_deg += detail::clamp(dref, max_step);

        const double pos_set_m = set_deg * deg2mrad;
        const double pos_ref_m = pos_ref_deg * deg2mrad;

        // position PI -> speed reference
        double e_pos = pos_ref_m - theta;
        int_pos += e_pos * dt;
        double spd_ref = detail::clamp(kp_pos * e_pos + ki_pos * int_pos, lim.speed);

        // speed PI -> torque reference
        double e_spd = spd_ref - omega;
        int_spd += e_spd * dt;
        double tq_ref = detail::clamp(kp_spd * e_spd + ki_spd * int_spd, lim.torque);

        // torque -> current references (id ref fixed at zero)
        double iq_ref = detail::clamp(tq_ref / kt_ctl, lim.current);
        double id_ref = 0.0;

        // current PIs -> voltage references (held over the sample)
        double e_id = id_ref - id;
        double e_iq = iq_ref - iq;
        int_id += e_id * dt;
        int_iq += e_iq * dt;
        double we = pole_pairs * omega;
        double vd = detail::clamp(kp_cur * e_id + ki_cur * int_id - we * lq * iq,
                                  lim.volt);
        double vq = detail::clamp(kp_cur * e_iq + ki_cur * int_iq + we * (ld * id + flux),
                                  lim.volt);

        // integrate electrical + mechanical dynamics
        for (int s = 0; s < substeps; ++s) {
            we = pole_pairs * omega;
            double did = (vd - res * id + we * lq * iq) / ld;
            double diq = (vq - res * iq - we * ld * id - we * flux) / lq;
            double tau_e = 1.5 * pole_pairs * (flux * iq + (ld - lq) * id * iq);
            double tau_fric = visc * omega + dry * std::tanh(omega / 0.05);
            double tau_ripple = tau_unb * std::sin(theta);
            double domega = (tau_e - tau_load - tau_fric - tau_ripple) / inertia;
            id += h * did;
            iq += h * diq;
            omega += h * domega;
            theta += h * omega;
        }

        // 1% full-scale measurement noise on measured channels
        const auto& sc = channel_scale();
        auto noise = [&](int ch) { return 0.01 * sc[static_cast<std::size_t>(ch)] * rng.normal(); };

        double pos_v_meas = theta / deg2mrad + noise(13) / 10.0;
        double vals[kNumChannels] = {
            vd,
            vq,
            pole_pairs * omega,
            iq_ref,
            id + noise(4) / 10.0,
            iq + noise(5) / 10.0,
            pos_set_m,
            pos_ref_m,
            theta + noise(8) / 100.0,
            spd_ref,
            omega + noise(10) / 50.0,
            tq_ref,
            set_deg,
            pos_v_meas,
        };
        for (int c = 0; c < kNumChannels; ++c)
            traj.channels[static_cast<std::size_t>(c)].push_back(static_cast<float>(vals[c]));
    }
    return traj;
}

// Affine OOD transform: y_i = x_i * var + shift + i * trend, per channel.
inline Trajectory make_ood(const Trajectory& src, double var, double shift,
                           double trend, int ood_label) {
    Trajectory out = src;
    out.label = ood_label;
    for (auto& ch : out.channels)
        for (std::size_t i = 0; i < ch.size(); ++i)
            ch[i] = static_cast<float>(static_cast<double>(ch[i]) * var + shift +
                                       static_cast<double>(i) * trend);
    return out;
}

struct ClassCount {
    int label;
    TrajType type;
    int count;
};

struct DatasetSpec {
    std::vector<ClassCount> entries;
    double duration_t1 = 60.0;
    double duration_t2 = 5.0;
    double duration_t3 = 15.0;

    double duration(TrajType t) const {
        switch (t) {
            case TrajType::T1: return duration_t1;
            case TrajType::T2: return duration_t2;
            case TrajType::T3: return duration_t3;
        }
        throw std::invalid_argument("unknown trajectory type");
    }
};

// Balanced development-style spec over classes {0, 16, 128, 511}.
inline DatasetSpec dev_spec(int per_class, bool include_t1 = false) {
    DatasetSpec s;
    for (int label : {0, 16, 128, 511}) {
        int remaining = per_class;
        if (include_t1) {
            int n1 = per_class / 5;
            s.entries.push_back({label, TrajType::T1, n1});
            remaining -= n1;
        }
        int n2 = remaining / 2;
        s.entries.push_back({label, TrajType::T2, n2});
        s.entries.push_back({label, TrajType::T3, remaining - n2});
    }
    return s;
}

// Final-validation-style spec: 85% nominal, 5% per fault class.
inline DatasetSpec final_spec(int total, bool include_t1 = false) {
    DatasetSpec s;
    int nom = static_cast<int>(std::llround(total * 0.85));
    int per_fault = static_cast<int>(std::llround(total * 0.05));
    for (int label : {0, 16, 128, 511}) {
        int cnt = (label == 0) ? nom : per_fault;
        int remaining = cnt;
        if (include_t1) {
            int n1 = cnt / 5;
            s.entries.push_back({label, TrajType::T1, n1});
            remaining -= n1;
        }
        int n2 = remaining / 2;
        s.entries.push_back({label, TrajType::T2, n2});
        s.entries.push_back({label, TrajType::T3, remaining - n2});
    }
    return s;
}

inline std::vector<Trajectory> generate_dataset(const DatasetSpec& spec,
                                                std::uint64_t seed) {
    std::vector<Trajectory> out;
    Rng master(seed);
    std::int64_t next_id = 0;
    for (const auto& e : spec.entries) {
        if (e.count < 0)
            throw std::invalid_argument("generate_dataset: negative count");
        for (int i = 0; i < e.count; ++i) {
            Rng prng = master.fork(static_cast<std::uint64_t>(next_id) + 1);
            PhysicalParams p = sample_params(e.label, prng);
            std::uint64_t sim_seed = prng.next_u64();
            Trajectory t = simulate(p, e.type, spec.duration(e.type), sim_seed);
            t.id = next_id++;
            out.push_back(std::move(t));
        }
    }
    return out;
}

} // namespace fdd::sim
