#pragma once

#include <stdexcept>
#include <string>

namespace qmbp {

/// Failure categories raised by the library. Conditions that a caller is
/// expected to handle by inspecting a result (inapplicable bound, unconverged
/// refinement, missing stable fit window) are reported through flags on the
/// result types instead.
enum class errc {
    negative_rate,
    zero_death_rate,
    no_birth_mass,
    conservation_violation,
    not_subcritical,
    bad_parameters,
    tolerance_not_met,
    maximizer_at_boundary,
    bad_truncation,
    no_convergence,
    invalid_seed_config,
    config_parse,
    io_error,
};

const char* to_string(errc code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

}  // namespace qmbp
