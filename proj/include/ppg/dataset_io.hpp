#pragma once

#include <string>

#include "ppg/signal.hpp"

namespace ppg {

// Text format: UTF-8, one JSON record per line,
//   {"id":...,"label":0|1,"sample_rate_hz":...,"samples":[...]}
// with samples written at full round-trip precision.
void write_dataset_text(const Dataset& dataset, const std::string& path);

// Binary format: magic "PPGD", version u16, record count u64, then per record
// id (u32 length + bytes), label u8, rate f64 LE, length u64, samples f32 LE.
void write_dataset_binary(const Dataset& dataset, const std::string& path);

// Dispatches on extension: ".ppgd" selects the binary format.
void write_dataset(const Dataset& dataset, const std::string& path);

// Sniffs the magic bytes to pick the decoder. Parse failures name the
// offending line or record; duplicate ids raise an integrity error.
Dataset read_dataset(const std::string& path);

}  // namespace ppg
