#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ltesim::sim {

struct ResultRow {
    double sweep_value = 0.0;
    std::string metric;
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Mean and standard error (sample std / sqrt(n)); n = 1 gives zero error.
ResultRow summarize(double sweep_value, std::string metric, std::span<const double> samples);

/// Rows kept sorted by (sweep value, metric name); a (sweep value, metric)
/// pair appears at most once.
class ResultTable {
public:
    ResultTable() = default;
    ResultTable(std::string experiment, std::string sweep_variable);

    const std::string& experiment() const noexcept { return experiment_; }
    const std::string& sweep_variable() const noexcept { return sweep_variable_; }
    const std::vector<ResultRow>& rows() const noexcept { return rows_; }
    bool empty() const noexcept { return rows_.empty(); }

    void add(ResultRow row);
    void add(double sweep_value, std::string metric, std::span<const double> samples);

    /// nullptr when absent.
    const ResultRow* find(double sweep_value, const std::string& metric) const;
    /// Throws OutOfRange when absent.
    const ResultRow& at(double sweep_value, const std::string& metric) const;

    /// Distinct sweep values in ascending order.
    std::vector<double> sweep_values() const;
    /// Distinct metric names in ascending order.
    std::vector<std::string> metrics() const;

    friend bool operator==(const ResultTable&, const ResultTable&) = default;

private:
    std::string experiment_;
    std::string sweep_variable_;
    std::vector<ResultRow> rows_;
};

/// `sweep_var,sweep_value,metric,mean,stderr,n` with a header row, LF line
/// endings and round-trip precision.
void write_csv(std::ostream& out, const ResultTable& table);
ResultTable parse_csv(std::istream& in, std::string experiment = {});

/// gnuplot script plotting every metric of `csv_name` against the sweep value.
std::string plot_script(const ResultTable& table, const std::string& csv_name);

struct EmittedFiles {
    std::filesystem::path csv;
    std::filesystem::path plot;
};

/// Writes <experiment>.csv and <experiment>.gp into out_dir, each through a
/// temporary file and a rename. Failures raise IoError with the path.
EmittedFiles emit_results(const ResultTable& table, const std::filesystem::path& out_dir);

} // namespace ltesim::sim
