#include "ltesim/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "ltesim/error.hpp"

namespace ltesim::sim {

namespace {

constexpr const char* kHeader = "sweep_var,sweep_value,metric,mean,stderr,n";

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool row_less(const ResultRow& a, double sweep, const std::string& metric)
{
    if (a.sweep_value != sweep) return a.sweep_value < sweep;
    return a.metric < metric;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidParameter("malformed number in CSV: '" + text + "'");
    }
    if (used != text.size()) throw InvalidParameter("malformed number in CSV: '" + text + "'");
    return v;
}

void write_atomically(const std::filesystem::path& target, const std::string& content)
{
    std::filesystem::path tmp = target;
    tmp += ".tmp." + std::to_string(static_cast<long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write result file", tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("cannot write result file", tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move result file into place", target.string());
    }
}

} // namespace

ResultRow summarize(double sweep_value, std::string metric, std::span<const double> samples)
{
    if (samples.empty()) throw InvalidParameter("cannot summarize an empty sample for " + metric);
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double se = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    return {sweep_value, std::move(metric), mean, se, samples.size()};
}

ResultTable::ResultTable(std::string experiment, std::string sweep_variable)
    : experiment_(std::move(experiment)), sweep_variable_(std::move(sweep_variable))
{
}

void ResultTable::add(ResultRow row)
{
    if (row.metric.empty() || row.metric.find_first_of(",\n\r") != std::string::npos)
        throw InvalidParameter("metric names must be non-empty and free of ',' and line breaks");
    const auto it = std::lower_bound(rows_.begin(), rows_.end(), row,
                                     [](const ResultRow& a, const ResultRow& b) { return row_less(a, b.sweep_value, b.metric); });
    if (it != rows_.end() && it->sweep_value == row.sweep_value && it->metric == row.metric)
        throw InvalidParameter("duplicate result row for " + row.metric);
    rows_.insert(it, std::move(row));
}

void ResultTable::add(double sweep_value, std::string metric, std::span<const double> samples)
{
    add(summarize(sweep_value, std::move(metric), samples));
}

const ResultRow* ResultTable::find(double sweep_value, const std::string& metric) const
{
    const auto it = std::lower_bound(rows_.begin(), rows_.end(), 0,
                                     [&](const ResultRow& a, int) { return row_less(a, sweep_value, metric); });
    if (it != rows_.end() && it->sweep_value == sweep_value && it->metric == metric) return &*it;
    return nullptr;
}

const ResultRow& ResultTable::at(double sweep_value, const std::string& metric) const
{
    const ResultRow* row = find(sweep_value, metric);
    if (row == nullptr) throw OutOfRange("no result row " + metric + " at " + format_double(sweep_value));
    return *row;
}

std::vector<double> ResultTable::sweep_values() const
{
    std::vector<double> out;
    for (const auto& r : rows_)
        if (out.empty() || out.back() != r.sweep_value) out.push_back(r.sweep_value);
    return out;
}

std::vector<std::string> ResultTable::metrics() const
{
    std::set<std::string> names;
    for (const auto& r : rows_) names.insert(r.metric);
    return {names.begin(), names.end()};
}

void write_csv(std::ostream& out, const ResultTable& table)
{
    out << kHeader << '\n';
    for (const auto& r : table.rows())
        out << table.sweep_variable() << ',' << format_double(r.sweep_value) << ',' << r.metric << ','
            << format_double(r.mean) << ',' << format_double(r.std_error) << ',' << r.n << '\n';
}

ResultTable parse_csv(std::istream& in, std::string experiment)
{
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw InvalidParameter("CSV header missing or malformed");
    std::string sweep_var;
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6) throw InvalidParameter("CSV row needs 6 fields: " + line);
        if (sweep_var.empty())
            sweep_var = f[0];
        else if (f[0] != sweep_var)
            throw InvalidParameter("CSV mixes sweep variables");
        ResultRow r;
        r.sweep_value = parse_number(f[1]);
        r.metric = f[2];
        r.mean = parse_number(f[3]);
        r.std_error = parse_number(f[4]);
        try {
            std::size_t used = 0;
            r.n = static_cast<std::size_t>(std::stoull(f[5], &used));
            if (used != f[5].size()) throw InvalidParameter("");
        } catch (const std::exception&) {
            throw InvalidParameter("malformed sample count in CSV: '" + f[5] + "'");
        }
        rows.push_back(std::move(r));
    }
    ResultTable table(std::move(experiment), std::move(sweep_var));
    for (auto& r : rows) table.add(std::move(r));
    return table;
}

std::string plot_script(const ResultTable& table, const std::string& csv_name)
{
    // One panel per metric family (the text before the first '.').
    std::map<std::string, std::vector<std::string>> families;
    for (const auto& m : table.metrics()) families[m.substr(0, m.find('.'))].push_back(m);

    std::ostringstream gp;
    gp << "# gnuplot script for " << csv_name << "\n";
    gp << "set datafile separator ','\n";
    gp << "set terminal pngcairo size 1200," << std::max<std::size_t>(1, families.size()) * 360 << "\n";
    gp << "set output '" << (table.experiment().empty() ? std::string("results") : table.experiment()) << ".png'\n";
    gp << "set key outside right\n";
    gp << "set grid\n";
    gp << "set multiplot layout " << std::max<std::size_t>(1, families.size()) << ",1\n";
    for (const auto& [family, metrics] : families) {
        gp << "set title '" << family << "'\n";
        gp << "set xlabel '" << table.sweep_variable() << "'\n";
        gp << "plot ";
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            if (i > 0) gp << ", \\\n     ";
            gp << "'" << csv_name << "' skip 1 using 2:(strcol(3) eq '" << metrics[i] << "' ? $4 : 1/0):5"
               << " with yerrorlines title '" << metrics[i] << "'";
        }
        gp << "\n";
    }
    if (families.empty()) gp << "set title 'no data'\nplot 0 notitle\n";
    gp << "unset multiplot\n";
    return gp.str();
}

EmittedFiles emit_results(const ResultTable& table, const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw IoError("cannot create output directory", out_dir.string());

    const std::string stem = table.experiment().empty() ? std::string("results") : table.experiment();
    EmittedFiles files{out_dir / (stem + ".csv"), out_dir / (stem + ".gp")};

    std::ostringstream csv;
    write_csv(csv, table);
    write_atomically(files.csv, csv.str());
    write_atomically(files.plot, plot_script(table, files.csv.filename().string()));
    return files;
}

} // namespace ltesim::sim
