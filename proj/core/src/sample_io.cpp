#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rsmastat/channels.hpp"

namespace rsmastat {

namespace {

constexpr const char* kMagic = "rsmastat-samples";
constexpr int kVersion = 1;

std::string hexfloat(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_double(const std::string& tok) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw std::runtime_error("read_sample_set: bad number '" + tok + "'");
    return v;
}

template <typename T>
T expect_field(std::istream& is, const std::string& name) {
    std::string key;
    T value{};
    if (!(is >> key) || key != name || !(is >> value))
        throw std::runtime_error("read_sample_set: expected field '" + name + "'");
    return value;
}

}  // namespace

void write_sample_set(std::ostream& os, const SampleSet& set) {
    os << kMagic << ' ' << kVersion << '\n'
       << "n_tx " << set.n_tx() << '\n'
       << "users " << set.users() << '\n'
       << "samples " << set.size() << '\n'
       << "seed " << set.seed_record().seed << '\n'
       << "generator " << set.seed_record().generator << '\n'
       << "data\n";
    for (int s = 0; s < set.size(); ++s) {
        const CMatrix& h = set[s];
        for (int m = 0; m < set.n_tx(); ++m) {
            for (int k = 0; k < set.users(); ++k) {
                if (k) os << ' ';
                os << hexfloat(h(m, k).real()) << ' ' << hexfloat(h(m, k).imag());
            }
            os << '\n';
        }
    }
    if (!os) throw std::runtime_error("write_sample_set: stream write failed");
}

SampleSet read_sample_set(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != kMagic)
        throw std::runtime_error("read_sample_set: not a sample-set file");
    if (version != kVersion)
        throw std::runtime_error("read_sample_set: unsupported version " + std::to_string(version));
    const int n_tx = expect_field<int>(is, "n_tx");
    const int users = expect_field<int>(is, "users");
    const int count = expect_field<int>(is, "samples");
    const auto seed = expect_field<std::uint64_t>(is, "seed");
    const auto generator = expect_field<std::string>(is, "generator");
    std::string data;
    if (!(is >> data) || data != "data") throw std::runtime_error("read_sample_set: missing data section");
    if (n_tx < 1 || users < 1 || count < 1) throw std::runtime_error("read_sample_set: bad dimensions");

    std::vector<CMatrix> samples;
    samples.reserve(static_cast<std::size_t>(count));
    std::string re, im;
    for (int s = 0; s < count; ++s) {
        CMatrix h(n_tx, users);
        for (int m = 0; m < n_tx; ++m)
            for (int k = 0; k < users; ++k) {
                if (!(is >> re >> im)) throw std::runtime_error("read_sample_set: truncated data");
                h(m, k) = cdouble(parse_double(re), parse_double(im));
            }
        samples.push_back(std::move(h));
    }
    return SampleSet(n_tx, users, std::move(samples), SeedRecord{seed, generator});
}

}  // namespace rsmastat
