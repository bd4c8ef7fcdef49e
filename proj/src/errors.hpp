#pragma once

#include <stdexcept>
#include <string>

namespace pdp {

enum class ErrorKind { Parameter, Domain, Shape, Resource, Io, Usage };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define PDP_DEFINE_ERROR(Name, Kind)                                              \
  class Name : public Error {                                                     \
   public:                                                                        \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {}      \
  };

PDP_DEFINE_ERROR(ParameterError, Parameter)
PDP_DEFINE_ERROR(DomainError, Domain)
PDP_DEFINE_ERROR(ShapeError, Shape)
PDP_DEFINE_ERROR(ResourceError, Resource)
PDP_DEFINE_ERROR(IoError, Io)
PDP_DEFINE_ERROR(UsageError, Usage)

#undef PDP_DEFINE_ERROR

}  // namespace pdp
