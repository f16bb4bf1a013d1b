#include "maxreg/signal_io.hpp"

#include "maxreg/errors.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace maxreg {

namespace detail {

namespace {

template <typename U>
void put_le(std::ostream& os, U v) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& is) {
    std::array<unsigned char, sizeof(U)> bytes{};
    is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!is) throw IoError("binary signal: truncated input");
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
    return v;
}

} // namespace

void put_u32(std::ostream& os, std::uint32_t v) { put_le(os, v); }
void put_u64(std::ostream& os, std::uint64_t v) { put_le(os, v); }
void put_f64(std::ostream& os, double v) { put_le(os, std::bit_cast<std::uint64_t>(v)); }
std::uint32_t get_u32(std::istream& is) { return get_le<std::uint32_t>(is); }
std::uint64_t get_u64(std::istream& is) { return get_le<std::uint64_t>(is); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

} // namespace detail

using namespace detail;

void write_signal_binary(std::ostream& os, const TimeSignal& s) {
    os.write("MRTS", 4);
    put_u32(os, kSignalFormatVersion);
    put_f64(os, s.grid.t_start);
    put_f64(os, s.grid.t_end);
    put_u64(os, s.grid.n_points);
    put_u32(os, s.grid.sampling == Sampling::cell_centered ? 1u : 0u);
    put_u32(os, 0u);
    put_u64(os, s.dim);
    for (const auto& z : s.values) {
        put_f64(os, z.real());
        put_f64(os, z.imag());
    }
    if (!os) throw IoError("binary signal: write failed");
}

TimeSignal read_signal_binary(std::istream& is) {
    std::array<char, 4> magic{};
    is.read(magic.data(), 4);
    if (!is || std::memcmp(magic.data(), "MRTS", 4) != 0) throw IoError("binary signal: bad magic");
    if (get_u32(is) != kSignalFormatVersion) throw IoError("binary signal: unsupported version");
    TimeGrid g;
    g.t_start = get_f64(is);
    g.t_end = get_f64(is);
    g.n_points = get_u64(is);
    g.sampling = get_u32(is) == 1u ? Sampling::cell_centered : Sampling::node;
    get_u32(is);
    const std::uint64_t dim = get_u64(is);
    g.validate();
    if (dim == 0 || dim > (1u << 24)) throw IoError("binary signal: implausible dimension");
    std::vector<cplx> values(g.n_points * dim);
    for (auto& z : values) {
        const double re = get_f64(is);
        const double im = get_f64(is);
        z = {re, im};
    }
    return TimeSignal(g, dim, std::move(values));
}

void write_signal_csv(std::ostream& os, const TimeSignal& s) {
    os << std::setprecision(17);
    os << "# t_start=" << s.grid.t_start << ",t_end=" << s.grid.t_end << ",sampling="
       << (s.grid.sampling == Sampling::cell_centered ? "cell_centered" : "node") << '\n';
    os << 't';
    if (s.dim == 1) {
        os << ",re,im";
    } else {
        for (std::size_t c = 0; c < s.dim; ++c) os << ",re" << c << ",im" << c;
    }
    os << '\n';
    for (std::size_t j = 0; j < s.grid.n_points; ++j) {
        os << s.grid.point(j);
        for (std::size_t c = 0; c < s.dim; ++c) os << ',' << s.at(j, c).real() << ',' << s.at(j, c).imag();
        os << '\n';
    }
    if (!os) throw IoError("csv signal: write failed");
}

namespace {

std::vector<double> split_doubles(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw IoError("csv signal: bad number '" + cell + "'");
        }
    }
    return out;
}

} // namespace

TimeSignal read_signal_csv(std::istream& is) {
    std::string line;
    bool have_meta = false;
    double t_start = 0.0;
    double t_end = 0.0;
    Sampling sampling = Sampling::node;
    std::size_t dim = 0;
    std::vector<double> times;
    std::vector<std::vector<cplx>> rows;

    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::stringstream ss(line.substr(1));
            std::string kv;
            while (std::getline(ss, kv, ',')) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                auto key = kv.substr(0, eq);
                key.erase(0, key.find_first_not_of(' '));
                const auto val = kv.substr(eq + 1);
                if (key == "t_start") t_start = std::stod(val);
                else if (key == "t_end") t_end = std::stod(val);
                else if (key == "sampling") sampling = val == "cell_centered" ? Sampling::cell_centered : Sampling::node;
            }
            have_meta = true;
            continue;
        }
        if (line[0] == 't') continue; // header
        const auto cells = split_doubles(line);
        if (cells.size() < 3 || (cells.size() - 1) % 2 != 0) throw IoError("csv signal: bad column count");
        const std::size_t d = (cells.size() - 1) / 2;
        if (dim == 0) dim = d;
        if (d != dim) throw IoError("csv signal: ragged rows");
        times.push_back(cells[0]);
        std::vector<cplx> row(d);
        for (std::size_t c = 0; c < d; ++c) row[c] = {cells[1 + 2 * c], cells[2 + 2 * c]};
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("csv signal: no samples");
    if (!have_meta) {
        const double dt = rows.size() > 1 ? times[1] - times[0] : 1.0;
        t_start = times.front();
        t_end = times.back() + dt;
        sampling = Sampling::node;
    }

    if (is_power_of_two(rows.size()) && rows.size() >= 8) {
        TimeGrid g = TimeGrid::make(t_start, t_end, rows.size(), sampling);
        std::vector<cplx> values;
        values.reserve(rows.size() * dim);
        for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
        return TimeSignal(g, dim, std::move(values));
    }

    // resample each component onto the next power of two
    std::vector<TimeSignal> comps;
    for (std::size_t c = 0; c < dim; ++c) {
        std::vector<cplx> col(rows.size());
        for (std::size_t j = 0; j < rows.size(); ++j) col[j] = rows[j][c];
        comps.push_back(resample_to_power_of_two(col, t_start, t_end, sampling));
    }
    TimeSignal out(comps.front().grid, dim);
    for (std::size_t j = 0; j < out.grid.n_points; ++j)
        for (std::size_t c = 0; c < dim; ++c) out.at(j, c) = comps[c].values[j];
    return out;
}

void save_signal(const std::filesystem::path& path, const TimeSignal& s) {
    const bool csv = path.extension() == ".csv";
    std::ofstream os(path, csv ? std::ios::out : std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    if (csv) write_signal_csv(os, s);
    else write_signal_binary(os, s);
}

TimeSignal load_signal(const std::filesystem::path& path) {
    const bool csv = path.extension() == ".csv";
    std::ifstream is(path, csv ? std::ios::in : std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return csv ? read_signal_csv(is) : read_signal_binary(is);
}

} // namespace maxreg
