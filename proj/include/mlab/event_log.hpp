#pragma once

#include <string>
#include <vector>

namespace mlab {

// Collects warnings and non-fatal errors raised while a pipeline runs.
// Operations that can degrade gracefully (skipped tickers, flat months,
// truncated prompts) record the event here instead of throwing.
class EventLog {
 public:
  enum class Level { kWarning, kError };

  struct Event {
    Level level;
    std::string message;
  };

  void warn(std::string message) {
    events_.push_back({Level::kWarning, std::move(message)});
  }
  void error(std::string message) {
    events_.push_back({Level::kError, std::move(message)});
  }

  const std::vector<Event>& events() const { return events_; }
  std::size_t error_count() const {
    std::size_t n = 0;
    for (const auto& e : events_)
      if (e.level == Level::kError) ++n;
    return n;
  }
  std::size_t warning_count() const { return events_.size() - error_count(); }

 private:
  std::vector<Event> events_;
};

// Nullable sink: modules accept an EventLog* and stay silent when null.
inline void log_warn(EventLog* log, std::string message) {
  if (log) log->warn(std::move(message));
}
inline void log_error(EventLog* log, std::string message) {
  if (log) log->error(std::move(message));
}

}  // namespace mlab
