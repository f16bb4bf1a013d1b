#include "maxreg/coefficient_io.hpp"

#include "maxreg/errors.hpp"
#include "maxreg/json_io.hpp"
#include "maxreg/signal_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace maxreg {

namespace {

constexpr int kCoefficientFormatVersion = 1;

} // namespace

void save_coefficients(const std::filesystem::path& header, const CoefficientField& A, BlockFormat format) {
    std::filesystem::path block = header;
    block.replace_extension(format == BlockFormat::binary ? ".bin" : ".csv");
    const std::size_t d = A.matrix_dim();

    json h = {{"format_version", kCoefficientFormatVersion},
              {"grid", to_json(A.time_grid())},
              {"mesh", to_json(A.mesh())},
              {"matrix_dim", d},
              {"lambda", A.lambda()},
              {"Lambda", A.Lambda()},
              {"T", A.horizon()},
              {"support", {A.support().first, A.support().second}},
              {"descriptor", to_json(A.descriptor())},
              {"block", {{"file", block.filename().string()},
                         {"format", format == BlockFormat::binary ? "binary" : "csv"}}}};
    {
        std::ofstream os(header);
        if (!os) throw IoError("cannot open " + header.string() + " for writing");
        os << h.dump(2) << '\n';
        if (!os) throw IoError("write failed: " + header.string());
    }

    const auto values = A.values();
    if (format == BlockFormat::binary) {
        std::ofstream os(block, std::ios::binary);
        if (!os) throw IoError("cannot open " + block.string() + " for writing");
        for (const auto& z : values) {
            detail::put_f64(os, z.real());
            detail::put_f64(os, z.imag());
        }
        if (!os) throw IoError("write failed: " + block.string());
        return;
    }
    std::ofstream os(block);
    if (!os) throw IoError("cannot open " + block.string() + " for writing");
    os << std::setprecision(17) << "j,cell,row,col,re,im\n";
    std::size_t i = 0;
    for (std::size_t j = 0; j < A.time_grid().n_points; ++j)
        for (std::size_t c = 0; c < A.cells(); ++c)
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t k = 0; k < d; ++k, ++i)
                    os << j << ',' << c << ',' << r << ',' << k << ',' << values[i].real() << ','
                       << values[i].imag() << '\n';
    if (!os) throw IoError("write failed: " + block.string());
}

CoefficientField load_coefficients(const std::filesystem::path& header) {
    std::ifstream is(header);
    if (!is) throw IoError("cannot open " + header.string());
    json h;
    try {
        h = json::parse(is);
    } catch (const json::exception& e) {
        throw IoError("coefficient header " + header.string() + ": " + e.what());
    }
    require_known_keys(h, {"format_version", "grid", "mesh", "matrix_dim", "lambda", "Lambda", "T", "support",
                           "descriptor", "block"},
                       "coefficient header");
    if (h.value("format_version", 0) != kCoefficientFormatVersion)
        throw IoError("coefficient header: unsupported format version");
    const TimeGrid grid = time_grid_from_json(h.at("grid"));
    const SpaceMesh mesh = space_mesh_from_json(h.at("mesh"));
    const std::size_t d = h.at("matrix_dim").get<std::size_t>();
    const std::size_t count = grid.n_points * mesh.n_cells * d * d;
    const auto& blk = h.at("block");
    const std::filesystem::path block = header.parent_path() / blk.at("file").get<std::string>();
    const std::string format = blk.at("format").get<std::string>();

    std::vector<cplx> values(count);
    if (format == "binary") {
        std::ifstream bs(block, std::ios::binary);
        if (!bs) throw IoError("cannot open " + block.string());
        for (auto& z : values) {
            const double re = detail::get_f64(bs);
            const double im = detail::get_f64(bs);
            z = {re, im};
        }
    } else if (format == "csv") {
        std::ifstream bs(block);
        if (!bs) throw IoError("cannot open " + block.string());
        std::string line;
        std::getline(bs, line);
        std::size_t rows = 0;
        while (std::getline(bs, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (cells.size() != 6) throw IoError("coefficient csv: expected 6 columns");
            try {
                const std::size_t j = std::stoul(cells[0]), c = std::stoul(cells[1]);
                const std::size_t r = std::stoul(cells[2]), k = std::stoul(cells[3]);
                if (j >= grid.n_points || c >= mesh.n_cells || r >= d || k >= d)
                    throw IoError("coefficient csv: index out of range");
                values[((j * mesh.n_cells + c) * d + r) * d + k] = {std::stod(cells[4]), std::stod(cells[5])};
            } catch (const std::logic_error&) {
                throw IoError("coefficient csv: bad number in '" + line + "'");
            }
            ++rows;
        }
        if (rows != count) throw IoError("coefficient csv: wrong number of rows");
    } else {
        throw IoError("coefficient header: unknown block format '" + format + "'");
    }

    const auto support = h.at("support").get<std::vector<double>>();
    if (support.size() != 2) throw IoError("coefficient header: support must have two entries");
    return CoefficientField(grid, mesh, d, std::move(values), h.at("T").get<double>(), {support[0], support[1]},
                            Certificate{h.at("lambda").get<double>(), h.at("Lambda").get<double>()},
                            descriptor_from_json(h.at("descriptor")));
}

} // namespace maxreg
