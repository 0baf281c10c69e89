#ifndef PIXANT_LEDGER_HPP
#define PIXANT_LEDGER_HPP

#include <atomic>
#include <cstdint>

namespace pixant {

/// Simulation-cost ledger. Costs are expressed in single-response-equivalents:
/// one multiport extraction counts as `weight` single-response runs.
struct CostLedger {
    std::atomic<std::uint64_t> multiport_extractions{0};
    std::atomic<std::uint64_t> single_response_evaluations{0};
    double weight = 2.3;

    CostLedger() = default;
    explicit CostLedger(double w) : weight(w) {}

    CostLedger(const CostLedger& other)
        : multiport_extractions(other.multiport_extractions.load()),
          single_response_evaluations(other.single_response_evaluations.load()),
          weight(other.weight) {}

    CostLedger& operator=(const CostLedger& other) {
        multiport_extractions.store(other.multiport_extractions.load());
        single_response_evaluations.store(other.single_response_evaluations.load());
        weight = other.weight;
        return *this;
    }

    double total() const {
        return static_cast<double>(single_response_evaluations.load()) +
               weight * static_cast<double>(multiport_extractions.load());
    }
};

} // namespace pixant

#endif // PIXANT_LEDGER_HPP
