/*
 Copyright 2026 The forge Authors.
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace forge {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input file problem; line is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, const std::string& what)
        : Error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
          file_(std::move(file)),
          line_(line) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

// A generator could not meet its target or a precondition on the inputs.
class GenerationError : public Error {
public:
    GenerationError(const std::string& what, std::size_t achieved)
        : Error(what), achieved_(achieved) {}

    std::size_t achieved() const { return achieved_; }

private:
    std::size_t achieved_;
};

}  // namespace forge
