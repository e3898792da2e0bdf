#pragma once

#include <stdexcept>
#include <string>

namespace wfforge {

// Base class for every domain failure raised by the toolkit. The CLI maps
// these to exit status 1; anything else escaping is a bug.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text (JSON syntax, schema mismatch, unknown fields).
class ParseError : public Error {
public:
    using Error::Error;
};

// A precondition on argument values was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

} // namespace wfforge
