#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spikeport/signal.hpp"

namespace spikeport {

/// Countable readout of an analog trajectory: strictly increasing spike
/// times within [0, horizon].
struct SpikeTrain {
    std::vector<double> times;
    double horizon = 0.0;
    double dt = 0.0;

    std::size_t count() const { return times.size(); }
};

enum class Behavior { Quiescent, Spiking, Bursting };

struct BehaviorEvidence {
    std::size_t n_spikes = 0;
    double isi_min = 0.0;
    double isi_max = 0.0;
    double isi_ratio = 0.0;
    std::size_t n_bursts = 0;
};

struct BehaviorClass {
    Behavior label = Behavior::Quiescent;
    BehaviorEvidence evidence;
};

std::string to_string(Behavior b);

/// Upward threshold crossings with linear interpolation between samples;
/// crossings within the refractory window of the previous spike are
/// suppressed.
SpikeTrain detect_spikes(const Signal& v, double threshold,
                         double refractory = 0.0);

/// Quiescent if < 3 spikes; Bursting if the ISI spread is bimodal
/// (max/min ratio > 5) with >= 2 bursts; Spiking otherwise.
BehaviorClass classify_behavior(const SpikeTrain& train, double horizon);

/// Burst segmentation: an ISI starts a new burst when it exceeds 3x the
/// running median ISI. Returns the time of the first spike of each burst.
std::vector<double> burst_onsets(const SpikeTrain& train);

/// Circular mean of the onset offsets (onset_b - nearest onset_a) mapped
/// to [0, 2*pi) by the period estimate. Uses burst onsets when the trains
/// burst, spike times otherwise. Antiphase <=> result near pi.
double phase_difference(const SpikeTrain& a, const SpikeTrain& b,
                        double period_estimate);

struct ReliabilityMetrics {
    double jitter = 0.0;  // mean across events of the matched-time std
    double event_count_consistency = 0.0;
    std::size_t n_events = 0;
};

/// Greedy cross-trial spike matching within alignment_window.
ReliabilityMetrics reliability_metrics(const std::vector<SpikeTrain>& rasters,
                                       double alignment_window);

/// Raster CSV: `trial,spike_time`.
std::string rasters_to_csv(const std::vector<SpikeTrain>& rasters);

/// Minimal raster plot mirroring the classic layout: one row per trial,
/// one tick per spike. Regenerable from the CSV; the CSV is the record.
std::string rasters_to_svg(const std::vector<SpikeTrain>& rasters,
                           double horizon);

}  // namespace spikeport
