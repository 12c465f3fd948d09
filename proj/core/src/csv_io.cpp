#include "cams/csv_io.hpp"
#include "cams/format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace cams {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return out;
}

bool is_na(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

struct Row {
    std::size_t line = 0;
    std::string study;
    double est = 0.0;
    std::optional<double> se;
    double subgroup12 = 0.0;
    std::optional<double> contrast_est;
    std::optional<double> contrast_se;
    std::optional<double> ifrac;
    std::optional<double> ifrac2;
    std::optional<long> n_a;
    std::optional<long> n_b;
    std::optional<long> n;
};

class RowReader {
public:
    RowReader(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            std::string h = header[i];
            if (h == "study.acronym" || h == "study") {
                h = "study.name";
            }
            if (h == "esti") {
                h = "est";
            }
            index_[h] = i;
        }
        for (const char* req : {"study.name", "est", "se", "subgroup12"}) {
            if (!index_.count(req)) {
                throw InputError(std::string("CSV header lacks required column '") + req + "'");
            }
        }
    }

    Row read(const std::vector<std::string>& f, std::size_t line) const {
        Row r;
        r.line = line;
        r.study = text(f, "study.name", line);
        if (r.study.empty()) {
            fail(line, "empty study.name");
        }
        const auto est = number(f, "est", line);
        if (!est) {
            fail(line, "missing est");
        }
        r.est = *est;
        r.se = number(f, "se", line);
        const auto sg = number(f, "subgroup12", line);
        if (!sg || (*sg != -0.5 && *sg != 0.5)) {
            fail(line, "subgroup12 must be -0.5 or 0.5");
        }
        r.subgroup12 = *sg;
        r.contrast_est = number(f, "contrast.esti", line);
        r.contrast_se = number(f, "contrast.se", line);
        r.ifrac = number(f, "ifrac", line);
        r.ifrac2 = number(f, "ifrac2", line);
        r.n_a = count(f, "n_a", line);
        r.n_b = count(f, "n_b", line);
        r.n = count(f, "n", line);
        return r;
    }

    [[noreturn]] static void fail(std::size_t line, const std::string& msg) {
        throw InputError("row " + std::to_string(line) + ": " + msg);
    }

private:
    std::string text(const std::vector<std::string>& f, const std::string& col, std::size_t line) const {
        const auto it = index_.find(col);
        if (it == index_.end()) {
            return {};
        }
        if (it->second >= f.size()) {
            fail(line, "too few fields");
        }
        return f[it->second];
    }

    std::optional<double> number(const std::vector<std::string>& f, const std::string& col, std::size_t line) const {
        const std::string t = text(f, col, line);
        if (is_na(t)) {
            return std::nullopt;
        }
        bool ok = false;
        const double v = parse_double(t, ok);
        if (!ok || !std::isfinite(v)) {
            fail(line, "column " + col + " is not a finite number: '" + t + "'");
        }
        return v;
    }

    std::optional<long> count(const std::vector<std::string>& f, const std::string& col, std::size_t line) const {
        const auto v = number(f, col, line);
        if (!v) {
            return std::nullopt;
        }
        if (*v < 0.0 || std::floor(*v) != *v) {
            fail(line, "column " + col + " must be a nonnegative integer");
        }
        return static_cast<long>(*v);
    }

    std::map<std::string, std::size_t> index_;
};

} // namespace

LoadResult parse_csv(std::istream& in, const CsvOptions& options) {
    if (!(options.missing_se > 0.0)) {
        throw ContractError("missing-subgroup sentinel SE must be positive");
    }
    std::string line;
    std::size_t line_no = 0;
    std::optional<RowReader> reader;
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::optional<Row>, std::optional<Row>>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto fields = split_fields(line);
        if (!reader) {
            reader.emplace(fields);
            continue;
        }
        Row r = reader->read(fields, line_no);
        auto [it, inserted] = rows.try_emplace(r.study);
        if (inserted) {
            order.push_back(r.study);
        }
        auto& slot = r.subgroup12 < 0.0 ? it->second.first : it->second.second;
        if (slot) {
            RowReader::fail(line_no, "duplicate subgroup " + std::string(r.subgroup12 < 0.0 ? "A" : "B") +
                                         " for study " + r.study);
        }
        slot = std::move(r);
    }
    if (!reader) {
        throw InputError("CSV input has no header row");
    }

    LoadResult out;
    out.data.scale_label = options.scale_label;
    for (const auto& id : order) {
        const auto& [ra, rb] = rows.at(id);
        auto observation = [&](const std::optional<Row>& r, const char* label, bool is_a) {
            if (!r || !r->se) {
                if (r) {
                    out.warnings.push_back("study " + id + ": subgroup " + label +
                                           " has no standard error; treated as missing");
                }
                return missing_observation(label, options.missing_se);
            }
            if (!(*r->se > 0.0)) {
                RowReader::fail(r->line, "se must be positive");
            }
            SubgroupObservation obs;
            obs.label = label;
            obs.estimate = r->est;
            if (options.exponentiated_input) {
                if (!(r->est > 0.0)) {
                    RowReader::fail(r->line, "exponentiated estimates must be positive");
                }
                obs.estimate = std::log(r->est);
            }
            obs.std_error = *r->se;
            if (r->n) {
                obs.count = r->n;
            } else if (is_a && r->n_a) {
                obs.count = r->n_a;
            } else if (!is_a && r->n_b) {
                obs.count = r->n_b;
            }
            return obs;
        };
        SubgroupObservation a = observation(ra, "A", true);
        SubgroupObservation b = observation(rb, "B", false);
        // Study-level counts may sit on the other row.
        for (const auto* r : {&ra, &rb}) {
            if (*r && !a.count && (*r)->n_a && !a.missing) {
                a.count = (*r)->n_a;
            }
            if (*r && !b.count && (*r)->n_b && !b.missing) {
                b.count = (*r)->n_b;
            }
        }
        StudyRecord s = StudyRecord::make(id, std::move(a), std::move(b));

        for (const auto* r : {&ra, &rb}) {
            if (!*r) {
                continue;
            }
            const Row& row = **r;
            if (row.ifrac && std::abs(*row.ifrac - s.info_fraction) > 1e-6) {
                out.warnings.push_back("row " + std::to_string(row.line) + ": ifrac " + format_double(*row.ifrac) +
                                       " differs from the SE-based value " + format_double(s.info_fraction));
            }
            if (row.ifrac && row.ifrac2 && std::abs(*row.ifrac2 - (row.subgroup12 + 0.5 - *row.ifrac)) > 1e-9) {
                out.warnings.push_back("row " + std::to_string(row.line) + ": ifrac2 != subgroup12 + 0.5 - ifrac");
            }
            if (row.contrast_est && !s.obs_a.missing && !s.obs_b.missing &&
                std::abs(*row.contrast_est - s.contrast()) > 1e-6) {
                out.warnings.push_back("row " + std::to_string(row.line) +
                                       ": contrast.esti differs from the subgroup difference");
            }
        }
        out.data.studies.push_back(std::move(s));
    }
    if (out.data.studies.empty()) {
        throw InputError("CSV contains no data rows");
    }
    out.data.validate();
    return out;
}

LoadResult load_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    return parse_csv(in, options);
}

void write_csv(std::ostream& out, const MetaDataset& data) {
    out << "study.name,contrast.esti,contrast.se,est,se,ifrac,subgroup12,ifrac2,n_a,n_b\n";
    for (const auto& s : data.studies) {
        const std::string count_a = s.obs_a.count ? std::to_string(*s.obs_a.count) : "NA";
        const std::string count_b = s.obs_b.count ? std::to_string(*s.obs_b.count) : "NA";
        const std::string contrast =
            format_double(s.contrast()) + "," + format_double(std::sqrt(s.contrast_variance()));
        for (const auto* obs : {&s.obs_a, &s.obs_b}) {
            const double sg = obs == &s.obs_a ? -0.5 : 0.5;
            std::string name = s.study_id;
            if (name.find_first_of(",\"") != std::string::npos) {
                std::string q = "\"";
                for (char ch : name) {
                    q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                }
                name = q + "\"";
            }
            out << name << ',' << contrast << ',' << format_double(obs->estimate) << ','
                << format_double(obs->std_error) << ',' << format_double(s.info_fraction) << ','
                << format_double(sg) << ',' << format_double(sg + 0.5 - s.info_fraction) << ',' << count_a << ','
                << count_b << '\n';
        }
    }
}

std::string to_csv(const MetaDataset& data) {
    std::ostringstream out;
    write_csv(out, data);
    return out.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw InputError("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

} // namespace cams
