#include "dampkde/error.hpp"
#include "dampkde/rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dampkde {

const char*
to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::evaluation: return "evaluation";
    case ErrorCode::degenerate_path: return "degenerate_path";
    case ErrorCode::unsupported_order: return "unsupported_order";
    case ErrorCode::calibration: return "calibration";
    case ErrorCode::positivity: return "positivity";
    case ErrorCode::amplitude: return "amplitude";
    case ErrorCode::explosion: return "explosion";
    case ErrorCode::bookkeeping: return "bookkeeping";
    case ErrorCode::construction: return "construction";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

unsigned
default_threads()
{
  return std::max(1u, std::thread::hardware_concurrency());
}

void
parallel_for(std::size_t n,
             unsigned threads,
             const std::function<void(std::size_t)>& body)
{
  if (threads == 0)
    threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
    return;
  }

  std::atomic<std::size_t> next{ 0 };
  std::atomic<bool> failed{ false };
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n)
        return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error)
          first_error = std::current_exception();
        failed.store(true);
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back(worker);
  for (auto& t : pool)
    t.join();
  if (first_error)
    std::rethrow_exception(first_error);
}

} // namespace dampkde
