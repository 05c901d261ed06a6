#include "follmer/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace follmer {

std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

OutputFormat parse_output_format(const std::string& s)
{
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    throw ConfigError("unknown output format '" + s + "' (expected csv or json)");
}

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Json json_number(double x) { return std::isfinite(x) ? Json(x) : Json(format_double(x)); }

Json json_vector(const Vector& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(json_number(v[i]));
    return out;
}

Json mixture_to_json(const GaussianMixture& m)
{
    Json centers = Json::array();
    for (const auto& c : m.centers()) centers.push_back(json_vector(c));
    return {{"dim", m.dim()}, {"sigma", m.sigma()}, {"weights", m.weights()}, {"centers", std::move(centers)}};
}

namespace {

double require_number(const Json& j, const std::string& what)
{
    if (!j.is_number()) throw ConfigError(what + ": expected a number");
    return j.get<double>();
}

} // namespace

GaussianMixture mixture_from_json(const Json& j)
{
    if (!j.is_object()) throw ConfigError("mixture: expected an object");
    for (const auto& [key, _] : j.items()) {
        if (key != "dim" && key != "sigma" && key != "weights" && key != "centers") {
            throw ConfigError("mixture: unknown key '" + key + "'");
        }
    }
    for (const char* key : {"dim", "sigma", "weights", "centers"}) {
        if (!j.contains(key)) throw ConfigError(std::string("mixture: missing key '") + key + "'");
    }
    if (!j["dim"].is_number_integer() || j["dim"].get<long long>() < 1) {
        throw ConfigError("mixture: dim must be a positive integer");
    }
    const auto dim = j["dim"].get<Eigen::Index>();
    const double sigma = require_number(j["sigma"], "mixture.sigma");
    if (!j["weights"].is_array() || !j["centers"].is_array()) {
        throw ConfigError("mixture: weights and centers must be arrays");
    }
    std::vector<double> weights;
    for (const auto& w : j["weights"]) weights.push_back(require_number(w, "mixture.weights"));
    std::vector<Vector> centers;
    for (const auto& c : j["centers"]) {
        if (!c.is_array() || static_cast<Eigen::Index>(c.size()) != dim) {
            throw ConfigError("mixture: every center must be an array of length dim");
        }
        Vector v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v[i] = require_number(c[static_cast<std::size_t>(i)], "mixture.centers");
        centers.push_back(std::move(v));
    }
    if (weights.size() != centers.size()) throw ConfigError("mixture: weights and centers differ in length");
    try {
        return GaussianMixture(std::move(weights), std::move(centers), sigma);
    } catch (const Error& e) {
        throw ConfigError(std::string("mixture: ") + e.what());
    }
}

std::string target_hash(const GaussianMixture& m)
{
    std::string text = std::to_string(m.dim()) + ";" + format_double(m.sigma()) + ";";
    for (double w : m.weights()) text += format_double(w) + ",";
    text += ";";
    for (const auto& c : m.centers()) {
        for (Eigen::Index i = 0; i < c.size(); ++i) text += format_double(c[i]) + ",";
        text += ";";
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_samples(std::ostream& os, const SampleSet& s, const SampleHeader& header, OutputFormat format)
{
    if (format == OutputFormat::Csv) {
        os << "# seed=" << header.seed << ",steps=" << header.steps << ",method=" << header.method
           << ",scheme=" << header.scheme << ",target_hash=" << header.target_hash << '\n';
        for (Eigen::Index j = 0; j < s.dim(); ++j) os << (j ? "," : "") << 'x' << j;
        os << '\n';
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            for (Eigen::Index j = 0; j < s.dim(); ++j) os << (j ? "," : "") << format_double(s.points(i, j));
            os << '\n';
        }
        return;
    }
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < s.size(); ++i) rows.push_back(json_vector(s.points.row(i).transpose()));
    Json out = {{"seed", header.seed},
                {"steps", header.steps},
                {"method", header.method},
                {"scheme", header.scheme},
                {"target_hash", header.target_hash},
                {"dim", s.dim()},
                {"n", s.size()},
                {"samples", std::move(rows)}};
    os << out.dump(2) << '\n';
}

void write_trajectories(std::ostream& os, std::uint64_t seed, const std::vector<TrajectoryRecord>& records,
                        OutputFormat format)
{
    if (records.empty()) return;
    const Eigen::Index d = records.front().trajectory->states.front().size();
    if (format == OutputFormat::Csv) {
        os << "seed,particle_id,t";
        for (Eigen::Index j = 0; j < d; ++j) os << ",x" << j;
        os << ",opnorm\n";
    }
    for (const auto& rec : records) {
        const Trajectory& tr = *rec.trajectory;
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            const double opnorm = tr.op_norms.empty() ? std::nan("") : tr.op_norms[k];
            if (format == OutputFormat::Csv) {
                os << seed << ',' << rec.particle_id << ',' << format_double(tr.times[k]);
                for (Eigen::Index j = 0; j < d; ++j) os << ',' << format_double(tr.states[k][j]);
                os << ',' << format_double(opnorm) << '\n';
            } else {
                const Json line = {{"seed", seed},
                                   {"particle_id", rec.particle_id},
                                   {"t", tr.times[k]},
                                   {"x", json_vector(tr.states[k])},
                                   {"opnorm", json_number(opnorm)}};
                os << line.dump() << '\n';
            }
        }
    }
}

} // namespace follmer
