#include "tvmort/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "tvmort/error.hpp"
#include "tvmort/format.hpp"

namespace tvmort {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

std::vector<std::string> split_comma(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

int to_int(const std::string& tok, std::size_t line, const char* what) {
    int v = 0;
    const auto* end = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc{} || p != end) {
        throw ParseError(std::string("bad ") + what + " '" + tok + "'", line);
    }
    return v;
}

double to_double(const std::string& tok, std::size_t line) {
    // std::from_chars for double is unavailable on older libstdc++.
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw ParseError("bad rate '" + tok + "'", line);
    }
    if (used != tok.size()) throw ParseError("bad rate '" + tok + "'", line);
    return v;
}

bool is_missing_token(const std::string& tok) { return tok == "." || tok == "NA" || tok.empty(); }

int hmd_age(const std::string& tok, std::size_t line) {
    if (!tok.empty() && tok.back() == '+') return to_int(tok.substr(0, tok.size() - 1), line, "age");
    return to_int(tok, line, "age");
}

std::size_t sex_column(Sex sex) {
    switch (sex) {
        case Sex::female:
            return 2;
        case Sex::male:
            return 3;
        case Sex::total:
            return 4;
    }
    return 4;
}

// Fills holes in one age row by linear interpolation on log rates between
// the nearest valid neighbours; edge holes take the nearest valid value.
void interpolate_row(std::vector<double>& logs, const std::vector<bool>& valid, int age) {
    const std::size_t T = logs.size();
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < T; ++t)
        if (valid[t]) idx.push_back(t);
    if (idx.empty()) {
        throw DataError("age " + std::to_string(age) + " has no usable rates to interpolate from");
    }
    for (std::size_t t = 0; t < T; ++t) {
        if (valid[t]) continue;
        auto hi = std::lower_bound(idx.begin(), idx.end(), t);
        if (hi == idx.begin()) {
            logs[t] = logs[*hi];
        } else if (hi == idx.end()) {
            logs[t] = logs[idx.back()];
        } else {
            const std::size_t l = *(hi - 1), r = *hi;
            const double f = double(t - l) / double(r - l);
            logs[t] = logs[l] + f * (logs[r] - logs[l]);
        }
    }
}

}  // namespace

MortalityPanel::MortalityPanel(std::vector<int> ages, std::vector<int> years, Matrix log_rates,
                               std::string label, Eigen::Index min_years)
    : ages_(std::move(ages)),
      years_(std::move(years)),
      log_rates_(std::move(log_rates)),
      label_(std::move(label)) {
    if (ages_.size() < 2) throw DataError("panel needs at least 2 ages");
    if (static_cast<Eigen::Index>(years_.size()) < min_years) {
        throw DataError("panel needs at least " + std::to_string(min_years) + " years");
    }
    if (log_rates_.rows() != static_cast<Eigen::Index>(ages_.size()) ||
        log_rates_.cols() != static_cast<Eigen::Index>(years_.size())) {
        throw ArgumentError("log-rate matrix shape does not match ages x years");
    }
    for (std::size_t i = 1; i < ages_.size(); ++i)
        if (ages_[i] <= ages_[i - 1]) throw DataError("ages must be strictly ascending");
    for (std::size_t i = 1; i < years_.size(); ++i)
        if (years_[i] != years_[i - 1] + 1) throw DataError("years must be consecutive");
    if (!log_rates_.allFinite()) throw DataError("log rates must be finite");
    age_means_ = log_rates_.rowwise().mean();
}

MortalityPanel MortalityPanel::from_log_rates(std::vector<int> ages, std::vector<int> years,
                                              Matrix log_rates, std::string label) {
    return MortalityPanel(std::move(ages), std::move(years), std::move(log_rates),
                          std::move(label), 3);
}

Matrix MortalityPanel::centered() const { return log_rates_.colwise() - age_means_; }

MortalityPanel MortalityPanel::slice_years(Eigen::Index first, Eigen::Index count) const {
    if (first < 0 || count < 1 || first + count > num_years()) {
        throw ArgumentError("year slice out of range");
    }
    std::vector<int> ys(years_.begin() + first, years_.begin() + first + count);
    return MortalityPanel(ages_, std::move(ys), log_rates_.middleCols(first, count), label_, 1);
}

MortalityPanel MortalityPanel::with_age_means(Vector means) const {
    if (means.size() != num_ages()) throw ArgumentError("age mean vector has the wrong length");
    if (!means.allFinite()) throw ArgumentError("age means must be finite");
    MortalityPanel out = *this;
    out.age_means_ = std::move(means);
    return out;
}

std::vector<MxRecord> parse_hmd_table(std::istream& in, int age_cap, Sex sex) {
    std::vector<MxRecord> out;
    const std::size_t col = sex_column(sex);
    bool header_seen = false;
    std::size_t lineno = 0;
    int last_year = 0;
    int last_age = -1;
    std::set<int> closed_years;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (!header_seen) {
            if (toks.size() >= 5 && toks[0] == "Year" && toks[1] == "Age") header_seen = true;
            continue;
        }
        if (toks.size() != 5) {
            throw ParseError("expected 5 columns (Year Age Female Male Total), got " +
                                 std::to_string(toks.size()),
                             lineno);
        }
        const int year = to_int(toks[0], lineno, "year");
        const int age = hmd_age(toks[1], lineno);
        if (age < 0) throw ParseError("negative age", lineno);
        if (out.empty() && last_age < 0) {
            last_year = year;
        } else if (year != last_year) {
            if (year < last_year || closed_years.count(year)) {
                throw DataError("line " + std::to_string(lineno) + ": year block " +
                                std::to_string(year) + " out of order");
            }
            closed_years.insert(last_year);
            last_year = year;
            last_age = -1;
        }
        if (age <= last_age) {
            throw DataError("line " + std::to_string(lineno) + ": ages not ascending within year " +
                            std::to_string(year));
        }
        last_age = age;
        // Validate every numeric column even if unused.
        for (std::size_t c = 2; c < 5; ++c)
            if (!is_missing_token(toks[c])) (void)to_double(toks[c], lineno);
        if (age > age_cap) continue;
        MxRecord rec{year, age, 0.0, false};
        if (is_missing_token(toks[col])) {
            rec.missing = true;
        } else {
            rec.mx = to_double(toks[col], lineno);
            if (rec.mx < 0.0) throw DomainError("line " + std::to_string(lineno) + ": negative rate");
        }
        out.push_back(rec);
    }
    if (!header_seen) throw ParseError("no 'Year Age Female Male Total' header found", 0);
    return out;
}

std::vector<MxRecord> parse_csv_long(std::istream& in) {
    std::vector<MxRecord> out;
    std::size_t lineno = 0;
    bool header_seen = false;
    std::set<std::pair<int, int>> seen;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_comma(line);
        if (!header_seen) {
            if (f.size() != 3 || f[0] != "year" || f[1] != "age" || f[2] != "mx") {
                throw ParseError("expected header 'year,age,mx'", lineno);
            }
            header_seen = true;
            continue;
        }
        if (f.size() != 3) throw ParseError("expected 3 fields", lineno);
        MxRecord rec;
        rec.year = to_int(f[0], lineno, "year");
        rec.age = to_int(f[1], lineno, "age");
        if (is_missing_token(f[2])) {
            rec.missing = true;
        } else {
            rec.mx = to_double(f[2], lineno);
            if (rec.mx < 0.0) {
                throw DomainError("line " + std::to_string(lineno) + ": negative rate " + f[2]);
            }
        }
        if (!seen.insert({rec.year, rec.age}).second) {
            throw DataError("duplicate observation for year " + std::to_string(rec.year) +
                            ", age " + std::to_string(rec.age));
        }
        out.push_back(rec);
    }
    if (!header_seen) throw ParseError("empty input; expected header 'year,age,mx'", 0);
    return out;
}

MortalityPanel build_panel(const std::vector<MxRecord>& records, ZeroPolicy policy,
                           std::string label) {
    std::set<int> age_set, year_set;
    for (const auto& r : records) {
        age_set.insert(r.age);
        year_set.insert(r.year);
    }
    std::vector<int> ages(age_set.begin(), age_set.end());
    std::vector<int> years(year_set.begin(), year_set.end());
    if (ages.size() < 2 || years.size() < 3) {
        throw DataError("need at least 2 ages and 3 years, got " + std::to_string(ages.size()) +
                        " x " + std::to_string(years.size()));
    }
    for (std::size_t i = 1; i < years.size(); ++i)
        if (years[i] != years[i - 1] + 1) {
            throw DataError("years not consecutive: gap after " + std::to_string(years[i - 1]));
        }

    std::map<int, std::size_t> age_idx;
    for (std::size_t i = 0; i < ages.size(); ++i) age_idx[ages[i]] = i;
    const std::size_t N = ages.size(), T = years.size();
    Matrix logs = Matrix::Zero(N, T);
    std::vector<std::vector<bool>> valid(N, std::vector<bool>(T, false));
    std::vector<std::vector<bool>> present(N, std::vector<bool>(T, false));

    for (const auto& r : records) {
        const std::size_t i = age_idx[r.age];
        const std::size_t t = static_cast<std::size_t>(r.year - years.front());
        if (present[i][t]) {
            throw DataError("duplicate observation for year " + std::to_string(r.year) +
                            ", age " + std::to_string(r.age));
        }
        present[i][t] = true;
        if (r.missing || !std::isfinite(r.mx)) continue;
        if (r.mx <= 0.0) {
            if (policy.kind == ZeroPolicyKind::floor) {
                logs(i, t) = std::log(policy.epsilon);
                valid[i][t] = true;
            }
            continue;
        }
        logs(i, t) = std::log(r.mx);
        valid[i][t] = true;
    }

    std::vector<std::string> holes;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t t = 0; t < T; ++t)
            if (!valid[i][t] && !(policy.kind == ZeroPolicyKind::interpolate && present[i][t])) {
                holes.push_back("(" + std::to_string(years[t]) + "," + std::to_string(ages[i]) + ")");
            }
    if (!holes.empty()) {
        std::string msg = "incomplete age x year grid; unusable cells (year,age):";
        for (std::size_t k = 0; k < holes.size() && k < 20; ++k) msg += " " + holes[k];
        if (holes.size() > 20) msg += " ... (" + std::to_string(holes.size()) + " total)";
        throw DataError(msg);
    }

    if (policy.kind == ZeroPolicyKind::interpolate) {
        for (std::size_t i = 0; i < N; ++i) {
            std::vector<double> row(T);
            for (std::size_t t = 0; t < T; ++t) row[t] = logs(i, t);
            interpolate_row(row, valid[i], ages[i]);
            for (std::size_t t = 0; t < T; ++t) logs(i, t) = row[t];
        }
    }
    return MortalityPanel::from_log_rates(std::move(ages), std::move(years), std::move(logs),
                                          std::move(label));
}

PanelSplit split_panel(const MortalityPanel& panel, int split_year) {
    const auto& ys = panel.years();
    if (split_year < ys.front() || split_year >= ys.back()) {
        throw ArgumentError("split year " + std::to_string(split_year) + " outside [" +
                            std::to_string(ys.front()) + ", " + std::to_string(ys.back() - 1) +
                            "]");
    }
    const Eigen::Index n_train = split_year - ys.front() + 1;
    if (n_train < 3) throw ArgumentError("training window needs at least 3 years");
    auto train = panel.slice_years(0, n_train);
    auto holdout = panel.slice_years(n_train, panel.num_years() - n_train);
    return PanelSplit{std::move(train), std::move(holdout), split_year};
}

MortalityPanel concat_years(const MortalityPanel& first, const MortalityPanel& second) {
    if (first.ages() != second.ages()) throw ArgumentError("panels have different ages");
    if (second.years().front() != first.years().back() + 1) {
        throw ArgumentError("panels do not adjoin in time");
    }
    std::vector<int> years = first.years();
    years.insert(years.end(), second.years().begin(), second.years().end());
    Matrix m(first.num_ages(), first.num_years() + second.num_years());
    m << first.log_rates(), second.log_rates();
    return MortalityPanel::from_log_rates(first.ages(), std::move(years), std::move(m),
                                          first.label());
}

void write_csv_long(std::ostream& out, const MortalityPanel& panel) {
    out << "year,age,mx\n";
    for (Eigen::Index t = 0; t < panel.num_years(); ++t)
        for (Eigen::Index i = 0; i < panel.num_ages(); ++i)
            out << panel.years()[t] << ',' << panel.ages()[i] << ','
                << fmt_double(std::exp(panel.log_rates()(i, t))) << '\n';
}

void write_panel_matrix(std::ostream& out, const MortalityPanel& panel) {
    out << "age\\year";
    for (int y : panel.years()) out << ',' << y;
    out << '\n';
    for (Eigen::Index i = 0; i < panel.num_ages(); ++i) {
        out << panel.ages()[i];
        for (Eigen::Index t = 0; t < panel.num_years(); ++t)
            out << ',' << fmt_double(panel.log_rates()(i, t));
        out << '\n';
    }
}

Sex parse_sex(const std::string& name) {
    if (name == "female") return Sex::female;
    if (name == "male") return Sex::male;
    if (name == "total") return Sex::total;
    throw ArgumentError("unknown sex '" + name + "' (female|male|total)");
}

ZeroPolicy parse_zero_policy(const std::string& spec) {
    if (spec == "reject") return {ZeroPolicyKind::reject, 1e-6};
    if (spec == "interpolate") return {ZeroPolicyKind::interpolate, 1e-6};
    if (spec.rfind("floor", 0) == 0) {
        ZeroPolicy p{ZeroPolicyKind::floor, 1e-6};
        if (spec.size() > 5) {
            if (spec[5] != ':') throw ArgumentError("zero policy floor takes 'floor:<eps>'");
            p.epsilon = std::stod(spec.substr(6));
            if (!(p.epsilon > 0.0)) throw ArgumentError("floor epsilon must be positive");
        }
        return p;
    }
    throw ArgumentError("unknown zero policy '" + spec + "' (reject|interpolate|floor[:eps])");
}

}  // namespace tvmort
