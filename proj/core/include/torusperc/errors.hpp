#pragma once

#include <stdexcept>
#include <string>

namespace torusperc {

// All precondition and contract violations surface as Error with a stable
// machine-readable code ("kernel-underresolved", "grid-mismatch", ...) plus a
// human-readable detail message. The CLI maps these to usage errors.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace torusperc
