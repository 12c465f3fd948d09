#pragma once

#include "cams/errors.hpp"
#include "cams/model.hpp"

#include <iosfwd>
#include <string>

namespace cams {

struct CsvOptions {
    double missing_se = kDefaultMissingSE;
    bool exponentiated_input = false;  // `est` holds ratios; converted with log on load
    std::string scale_label = "log-RR";
};

struct LoadResult {
    MetaDataset data;
    Warnings warnings;
};

/// Two rows per study (subgroup12 = -0.5 for A, +0.5 for B). Columns:
/// study.name, est, se, subgroup12 (required); contrast.esti, contrast.se,
/// ifrac, ifrac2, n_a, n_b, n (optional). A study with a single row gets the
/// missing-subgroup sentinel for the other subgroup.
LoadResult parse_csv(std::istream& in, const CsvOptions& options = {});
LoadResult load_csv(const std::string& path, const CsvOptions& options = {});

/// Writes every column of the schema with shortest round-trip numbers.
void write_csv(std::ostream& out, const MetaDataset& data);
std::string to_csv(const MetaDataset& data);

/// Writes `content` to a temporary file next to `path` and renames it.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace cams
