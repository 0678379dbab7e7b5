#pragma once

#include <stdexcept>
#include <string>

namespace rnode {

// Error taxonomy mirrored by the C API status codes: input errors map to
// RNODE_ERR_INPUT, everything else to RNODE_ERR_INTERNAL.
class InputError : public std::runtime_error {
public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

class InternalError : public std::runtime_error {
public:
  explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

class MalformedRecord : public InputError {
public:
  MalformedRecord(int line_no, const std::string& what)
      : InputError("malformed record at line " + std::to_string(line_no) + ": " + what),
        line_no(line_no) {}
  int line_no;
};

class NonMonotonicTime : public InputError {
public:
  explicit NonMonotonicTime(long long frame_index)
      : InputError("non-monotonic time/index at frame " + std::to_string(frame_index)),
        frame_index(frame_index) {}
  long long frame_index;
};

class BBoxOutOfBounds : public InputError {
public:
  explicit BBoxOutOfBounds(long long frame_index)
      : InputError("bbox out of frame bounds at frame " + std::to_string(frame_index)),
        frame_index(frame_index) {}
  long long frame_index;
};

class IoFailure : public InputError {
public:
  explicit IoFailure(const std::string& path) : InputError("io failure: " + path) {}
};

class DegenerateInput : public InputError {
public:
  explicit DegenerateInput(const std::string& what) : InputError("degenerate input: " + what) {}
};

class InfeasibleScript : public InputError {
public:
  explicit InfeasibleScript(const std::string& what) : InputError("infeasible script: " + what) {}
};

}  // namespace rnode
