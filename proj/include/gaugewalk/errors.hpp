#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gaugewalk {

/// Violated call contract: wrong time index, wrong substep direction, short schedule.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Potential or gauge function could not be sampled at a lattice point.
class SamplingError : public std::runtime_error {
public:
    SamplingError(long time_index, std::size_t site, const std::string& what)
        : std::runtime_error("sampling failed at (j=" + std::to_string(time_index) +
                             ", site=" + std::to_string(site) + "): " + what),
          time_index_(time_index), site_(site) {}

    long time_index() const noexcept { return time_index_; }
    std::size_t site() const noexcept { return site_; }

private:
    long time_index_;
    std::size_t site_;
};

/// A computed quantity that must vanish by construction did not.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reference integrator lost norm beyond the allowed drift.
class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gaugewalk
