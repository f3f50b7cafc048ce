#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace dampkde {

//! Failure categories. The CLI maps these onto the `code` field of its
//! error JSON, so the string names are part of the external interface.
enum class ErrorCode
{
  evaluation,
  degenerate_path,
  unsupported_order,
  calibration,
  positivity,
  amplitude,
  explosion,
  bookkeeping,
  construction,
  config,
  io
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error
{
public:
  using Context = std::map<std::string, std::string>;

  Error(ErrorCode code, const std::string& message, Context context = {})
    : std::runtime_error(message)
    , code_(code)
    , context_(std::move(context))
  {}

  ErrorCode code() const { return code_; }
  const Context& context() const { return context_; }

private:
  ErrorCode code_;
  Context context_;
};

} // namespace dampkde
