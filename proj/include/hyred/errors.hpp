#ifndef HYRED_ERRORS_HPP
#define HYRED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hyred {

struct HyredError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The current context cannot represent a needed element; retry with the
// suggested (N, m). Caught at operation entry points that auto-enlarge.
struct ExtensionRequired : HyredError {
    int want_N, want_m;
    ExtensionRequired(int N, int m, const std::string& where)
        : HyredError("extension required (N=" + std::to_string(N) +
                     ", m=" + std::to_string(m) + ") in " + where),
          want_N(N), want_m(m) {}
};

struct ExtensionBudgetExceeded : HyredError {
    ExtensionBudgetExceeded(const std::string& op, int N, int m, int budget)
        : HyredError("extension budget exceeded in " + op + ": wanted N=" +
                     std::to_string(N) + ", m=" + std::to_string(m) +
                     " with N*m limit " + std::to_string(budget)) {}
};

struct PrecisionExhausted : HyredError {
    explicit PrecisionExhausted(const std::string& op)
        : HyredError("precision exhausted in " + op) {}
};

struct DenominatorNotSupported : HyredError {
    explicit DenominatorNotSupported(const std::string& what)
        : HyredError("valuation denominator not in value group: " + what) {}
};

struct OddValuation : HyredError {
    explicit OddValuation(const std::string& what)
        : HyredError("odd valuation in square root: " + what) {}
};

struct NegativeValuation : HyredError {
    explicit NegativeValuation(const std::string& what)
        : HyredError("residue of element with negative valuation: " + what) {}
};

struct NoTowerElement : HyredError {
    // An element (typically a square root) provably fails to exist in any
    // field of the form Q_2(zeta, 2^(1/N)); detected by the approximation
    // chain stalling against the budget.
    explicit NoTowerElement(const std::string& what)
        : HyredError("element not representable in the tower family: " + what) {}
};

} // namespace hyred

#endif
