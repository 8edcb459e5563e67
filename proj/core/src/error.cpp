#include "streamforge/error.hpp"

namespace streamforge {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kCapacity: return "capacity error";
    case ErrorKind::kSchedule: return "schedule error";
    case ErrorKind::kSequencing: return "sequencing error";
    case ErrorKind::kState: return "state error";
    case ErrorKind::kTrace: return "trace error";
    case ErrorKind::kProtocol: return "protocol error";
    case ErrorKind::kEngine: return "engine error";
  }
  return "error";
}

}  // namespace streamforge
