#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace epimob {

// Plain comma split, no quoting. Field values must not contain commas.
std::vector<std::string> split_csv_line(const std::string& line);

// Round-trippable decimal formatting ("%.17g"), used everywhere a double is
// written to disk so repeated runs produce byte-identical files.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit over the file bytes, as a 16-digit hex string. Provenance
// bookkeeping only, not a cryptographic digest.
std::string fnv1a_file_digest(const std::string& path);
std::string fnv1a_digest(const std::string& bytes);

} // namespace epimob
