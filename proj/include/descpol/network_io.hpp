#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "descpol/errors.hpp"
#include "descpol/network.hpp"

// Text serialization for networks and optimizer state.
//
//   descpol-qnet 1
//   architecture <input> <hidden-count> <h_1> ... <h_n> <output>
//   params <count>
//   <value> ...            (one per line, %.17g, flat() order)
//
// Checkpoints append an "adam" section with options, step and both moment vectors.

namespace descpol {

namespace detail {

inline std::string format_exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != token.size()) throw std::runtime_error("malformed number '" + token + "'");
    return v;
}

inline void expect(std::istream& in, const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) throw std::runtime_error("expected '" + word + "', found '" + got + "'");
}

inline void write_values(std::ostream& out, const std::vector<double>& values) {
    out << "params " << values.size() << '\n';
    for (double v : values) out << format_exact(v) << '\n';
}

inline std::vector<double> read_values(std::istream& in) {
    expect(in, "params");
    std::size_t count = 0;
    if (!(in >> count)) throw std::runtime_error("missing parameter count");
    std::vector<double> values(count);
    std::string token;
    for (auto& v : values) {
        if (!(in >> token)) throw std::runtime_error("truncated parameter list");
        v = parse_double(token);
    }
    return values;
}

}  // namespace detail

inline void write_network(std::ostream& out, const QNetwork& net) {
    const auto& a = net.architecture();
    out << "descpol-qnet 1\narchitecture " << a.input_width << ' ' << a.hidden.size();
    for (auto h : a.hidden) out << ' ' << h;
    out << ' ' << a.output_width << '\n';
    detail::write_values(out, net.flat());
}

inline QNetwork read_network(std::istream& in) {
    detail::expect(in, "descpol-qnet");
    detail::expect(in, "1");
    detail::expect(in, "architecture");
    NetworkArchitecture arch;
    std::size_t hidden = 0;
    if (!(in >> arch.input_width >> hidden)) throw std::runtime_error("malformed architecture header");
    arch.hidden.resize(hidden);
    for (auto& h : arch.hidden)
        if (!(in >> h)) throw std::runtime_error("malformed architecture header");
    if (!(in >> arch.output_width)) throw std::runtime_error("malformed architecture header");
    QNetwork net(arch);
    net.assign_flat(detail::read_values(in));
    return net;
}

inline void write_checkpoint(std::ostream& out, const QNetwork& net, const AdamState& adam) {
    write_network(out, net);
    const auto& o = adam.options;
    out << "adam " << detail::format_exact(o.learning_rate) << ' ' << detail::format_exact(o.beta1) << ' '
        << detail::format_exact(o.beta2) << ' ' << detail::format_exact(o.epsilon) << ' ' << adam.step << '\n';
    detail::write_values(out, adam.first_moment.flat());
    detail::write_values(out, adam.second_moment.flat());
}

struct Checkpoint {
    QNetwork network;
    AdamState adam;
};

inline Checkpoint read_checkpoint(std::istream& in) {
    Checkpoint c;
    c.network = read_network(in);
    c.adam = AdamState::for_network(c.network);
    detail::expect(in, "adam");
    std::string lr, b1, b2, eps;
    if (!(in >> lr >> b1 >> b2 >> eps >> c.adam.step)) throw std::runtime_error("malformed adam header");
    c.adam.options = {detail::parse_double(lr), detail::parse_double(b1), detail::parse_double(b2),
                      detail::parse_double(eps)};
    c.adam.first_moment.assign_flat(detail::read_values(in));
    c.adam.second_moment.assign_flat(detail::read_values(in));
    return c;
}

inline void save_network(const std::string& path, const QNetwork& net) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_network(out, net);
}

inline QNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return read_network(in);
}

}  // namespace descpol
