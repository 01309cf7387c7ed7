#pragma once

#include <exception>
#include <string>
#include <vector>

namespace sbdp::detail {

/// Runs body(i) for i in [0, count), serially when parallelism <= 1 and with
/// OpenMP workers otherwise. Exceptions are captured per index so callers can
/// report the lowest failing index deterministically.
template <class Body>
std::vector<std::string> parallel_for(int count, int parallelism, Body&& body) {
  std::vector<std::string> errors(count);
  auto guarded = [&](int i) {
    try {
      body(i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "unknown error";
    }
  };
  if (parallelism <= 1) {
    for (int i = 0; i < count; ++i) guarded(i);
  } else {
#pragma omp parallel for num_threads(parallelism) schedule(static)
    for (int i = 0; i < count; ++i) guarded(i);
  }
  return errors;
}

inline int first_error(const std::vector<std::string>& errors) {
  for (size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) return static_cast<int>(i);
  return -1;
}

}  // namespace sbdp::detail
