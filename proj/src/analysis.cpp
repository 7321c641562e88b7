#include "spikeport/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace spikeport {

std::string to_string(Behavior b) {
    switch (b) {
        case Behavior::Quiescent: return "Quiescent";
        case Behavior::Spiking: return "Spiking";
        case Behavior::Bursting: return "Bursting";
    }
    return "?";
}

SpikeTrain detect_spikes(const Signal& v, double threshold,
                         double refractory) {
    if (refractory < 0.0)
        throw std::invalid_argument("detect_spikes: refractory must be >= 0");
    SpikeTrain train;
    train.horizon = v.horizon();
    train.dt = v.dt;
    double last = -1e300;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double a = v.samples[i], b = v.samples[i + 1];
        if (a < threshold && b >= threshold) {
            const double frac = (threshold - a) / (b - a);
            const double t = (static_cast<double>(i) + frac) * v.dt;
            if (t - last >= refractory) {
                train.times.push_back(t);
                last = t;
            }
        }
    }
    return train;
}

namespace {

std::vector<double> isis(const SpikeTrain& train) {
    std::vector<double> out;
    for (std::size_t i = 1; i < train.times.size(); ++i)
        out.push_back(train.times[i] - train.times[i - 1]);
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

std::vector<double> burst_onsets(const SpikeTrain& train) {
    if (train.times.empty()) return {};
    std::vector<double> onsets = {train.times.front()};
    std::vector<double> seen;
    const std::vector<double> gaps = isis(train);
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        seen.push_back(gaps[i]);
        const double med = median(seen);
        if (gaps[i] > 3.0 * med) onsets.push_back(train.times[i + 1]);
    }
    return onsets;
}

BehaviorClass classify_behavior(const SpikeTrain& train, double horizon) {
    (void)horizon;  // rule is ratio-based, invariant to uniform rescaling
    BehaviorClass out;
    out.evidence.n_spikes = train.count();
    if (train.count() < 3) {
        out.label = Behavior::Quiescent;
        return out;
    }
    const std::vector<double> gaps = isis(train);
    const auto [mn, mx] = std::minmax_element(gaps.begin(), gaps.end());
    out.evidence.isi_min = *mn;
    out.evidence.isi_max = *mx;
    out.evidence.isi_ratio = *mn > 0.0 ? *mx / *mn : 0.0;
    out.evidence.n_bursts = burst_onsets(train).size();
    if (out.evidence.isi_ratio > 5.0 && out.evidence.n_bursts >= 2)
        out.label = Behavior::Bursting;
    else
        out.label = Behavior::Spiking;
    return out;
}

double phase_difference(const SpikeTrain& a, const SpikeTrain& b,
                        double period_estimate) {
    if (a.times.empty() || b.times.empty())
        throw std::invalid_argument("phase_difference: empty spike train");
    if (!(period_estimate > 0.0))
        throw std::invalid_argument("phase_difference: period must be > 0");

    auto onsets = [](const SpikeTrain& t) {
        std::vector<double> on = burst_onsets(t);
        return on.size() >= 2 ? on : t.times;
    };
    const std::vector<double> ons_a = onsets(a);
    const std::vector<double> ons_b = onsets(b);

    double cx = 0.0, cy = 0.0;
    for (double tb : ons_b) {
        // nearest onset of a
        auto it = std::lower_bound(ons_a.begin(), ons_a.end(), tb);
        double ta = ons_a.front();
        if (it == ons_a.end())
            ta = ons_a.back();
        else if (it != ons_a.begin())
            ta = (*it - tb < tb - *(it - 1)) ? *it : *(it - 1);
        else
            ta = *it;
        const double phase = 2.0 * M_PI * (tb - ta) / period_estimate;
        cx += std::cos(phase);
        cy += std::sin(phase);
    }
    double mean = std::atan2(cy, cx);
    if (mean < 0.0) mean += 2.0 * M_PI;
    return mean;
}

ReliabilityMetrics reliability_metrics(const std::vector<SpikeTrain>& rasters,
                                       double alignment_window) {
    if (rasters.size() < 2)
        throw std::invalid_argument("reliability_metrics: need >= 2 trials");

    struct Tagged {
        double t;
        std::size_t trial;
    };
    std::vector<Tagged> pool;
    for (std::size_t r = 0; r < rasters.size(); ++r)
        for (double t : rasters[r].times) pool.push_back({t, r});
    std::sort(pool.begin(), pool.end(),
              [](const Tagged& x, const Tagged& y) { return x.t < y.t; });

    struct Event {
        std::vector<double> times;
        std::vector<bool> member;
        double seed;
    };
    std::vector<Event> events;
    std::vector<bool> assigned(pool.size(), false);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (assigned[i]) continue;
        Event ev;
        ev.member.assign(rasters.size(), false);
        ev.seed = pool[i].t;
        for (std::size_t j = i; j < pool.size(); ++j) {
            if (assigned[j]) continue;
            if (pool[j].t - ev.seed > alignment_window) break;
            if (ev.member[pool[j].trial]) continue;
            ev.member[pool[j].trial] = true;
            ev.times.push_back(pool[j].t);
            assigned[j] = true;
        }
        events.push_back(std::move(ev));
    }

    ReliabilityMetrics out;
    // consensus events: present in a majority of trials
    std::vector<const Event*> consensus;
    for (const Event& ev : events)
        if (2 * ev.times.size() > rasters.size()) consensus.push_back(&ev);
    out.n_events = consensus.size();

    double jitter_acc = 0.0;
    std::size_t jitter_n = 0;
    for (const Event* ev : consensus) {
        if (ev->times.size() < 2) continue;
        const double mean =
            std::accumulate(ev->times.begin(), ev->times.end(), 0.0) /
            ev->times.size();
        double var = 0.0;
        for (double t : ev->times) var += (t - mean) * (t - mean);
        var /= (ev->times.size() - 1);
        jitter_acc += std::sqrt(var);
        ++jitter_n;
    }
    out.jitter = jitter_n ? jitter_acc / jitter_n : 0.0;

    std::size_t complete_trials = 0;
    for (std::size_t r = 0; r < rasters.size(); ++r) {
        bool complete = true;
        for (const Event* ev : consensus)
            if (!ev->member[r]) {
                complete = false;
                break;
            }
        if (complete) ++complete_trials;
    }
    out.event_count_consistency =
        static_cast<double>(complete_trials) / rasters.size();
    return out;
}

std::string rasters_to_csv(const std::vector<SpikeTrain>& rasters) {
    std::ostringstream out;
    out.precision(17);
    out << "trial,spike_time\n";
    for (std::size_t r = 0; r < rasters.size(); ++r)
        for (double t : rasters[r].times) out << r << ',' << t << '\n';
    return out.str();
}

std::string rasters_to_svg(const std::vector<SpikeTrain>& rasters,
                           double horizon) {
    const int width = 800, row = 12, pad = 10;
    const int height = pad * 2 + row * static_cast<int>(rasters.size());
    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
        << "' height='" << height << "'>\n";
    for (std::size_t r = 0; r < rasters.size(); ++r) {
        const int y0 = pad + row * static_cast<int>(r);
        for (double t : rasters[r].times) {
            const double x = pad + (width - 2 * pad) * t / horizon;
            out << "<line x1='" << x << "' y1='" << y0 << "' x2='" << x
                << "' y2='" << y0 + row - 3
                << "' stroke='black' stroke-width='1'/>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace spikeport
