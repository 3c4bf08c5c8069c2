#ifndef DISCUCB_EPISODIC_LOG_HPP
#define DISCUCB_EPISODIC_LOG_HPP

#include <vector>

#include <discucb/gp/dataset.hpp>

namespace discucb {

    struct VisitedPoint {
        Vector z; // joined (x, u) actually executed
        Vector y; // observed next state
        double variance = 0.0; // predictive variance at selection time
        double discrepancy = 0.0; // ||mu - m_tau|| at selection time
    };

    struct EpisodeLog {
        int tau = 0;
        Vector reset_state;
        std::vector<VisitedPoint> visited;
    };

} // namespace discucb

#endif
