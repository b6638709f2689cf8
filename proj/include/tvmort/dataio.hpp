#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tvmort/types.hpp"

namespace tvmort {

enum class Sex { female, male, total };

/// One observed central death rate.
struct MxRecord {
    int year = 0;
    int age = 0;
    double mx = 0.0;
    bool missing = false;
};

enum class ZeroPolicyKind { reject, interpolate, floor };

/// What build_panel does with zero, negative or missing rates.
struct ZeroPolicy {
    ZeroPolicyKind kind = ZeroPolicyKind::reject;
    double epsilon = 1e-6;  // used by floor only
};

inline constexpr int kDefaultAgeCap = 90;

/// N ages x T consecutive years of log central death rates, with per-age
/// time means. Immutable once built.
class MortalityPanel {
public:
    /// Validates shape and finiteness, then computes the age means.
    /// Throws DataError / ArgumentError on violated invariants.
    static MortalityPanel from_log_rates(std::vector<int> ages, std::vector<int> years,
                                         Matrix log_rates, std::string label = {});

    const std::vector<int>& ages() const noexcept { return ages_; }
    const std::vector<int>& years() const noexcept { return years_; }
    const Matrix& log_rates() const noexcept { return log_rates_; }
    const Vector& age_means() const noexcept { return age_means_; }
    const std::string& label() const noexcept { return label_; }

    Eigen::Index num_ages() const noexcept { return log_rates_.rows(); }
    Eigen::Index num_years() const noexcept { return log_rates_.cols(); }

    /// log_rates with age_means removed from every row.
    Matrix centered() const;

    /// Contiguous sub-range of years [first, first + count). The slice gets
    /// its own age means. Slices shorter than three years are allowed so
    /// that short holdouts can be represented; fitting rejects them.
    MortalityPanel slice_years(Eigen::Index first, Eigen::Index count) const;

    /// Copy whose age means are the given vector instead of the sample means,
    /// for data with a known level (zero for simulated centred data).
    MortalityPanel with_age_means(Vector means) const;

private:
    MortalityPanel(std::vector<int> ages, std::vector<int> years, Matrix log_rates,
                   std::string label, Eigen::Index min_years);

    std::vector<int> ages_;
    std::vector<int> years_;
    Matrix log_rates_;
    Vector age_means_;
    std::string label_;
};

struct PanelSplit {
    MortalityPanel train;
    MortalityPanel holdout;
    int split_year;  // last training year
};

/// Reads the HMD Mx_1x1 layout (Year Age Female Male Total). Rows above the
/// "Year Age ..." header are ignored; "110+" maps to 110 and "." marks a
/// missing rate. Ages above age_cap are dropped.
std::vector<MxRecord> parse_hmd_table(std::istream& in, int age_cap = kDefaultAgeCap,
                                      Sex sex = Sex::total);

/// Reads "year,age,mx" rows. "." and "NA" mark missing rates.
std::vector<MxRecord> parse_csv_long(std::istream& in);

MortalityPanel build_panel(const std::vector<MxRecord>& records, ZeroPolicy policy = {},
                           std::string label = {});

/// Training years are those up to and including split_year.
PanelSplit split_panel(const MortalityPanel& panel, int split_year);

/// Concatenates two panels with identical ages and adjoining years.
MortalityPanel concat_years(const MortalityPanel& first, const MortalityPanel& second);

/// "year,age,mx" long format with mx = exp(log rate).
void write_csv_long(std::ostream& out, const MortalityPanel& panel);

/// Matrix of log rates, header "age\year,<y1>,<y2>,...".
void write_panel_matrix(std::ostream& out, const MortalityPanel& panel);

Sex parse_sex(const std::string& name);
ZeroPolicy parse_zero_policy(const std::string& spec);

}  // namespace tvmort
