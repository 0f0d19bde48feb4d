#pragma once

#include <gtest/gtest.h>

#include <string>

#include "feynpar/error.hpp"
#include "feynpar/io.hpp"
#include "feynpar/poly.hpp"

namespace fpt {

using namespace feynpar;

inline std::string corpus_path(const std::string& file) { return std::string(FEYNPAR_CORPUS_DIR) + "/" + file; }

inline FeynmanGraph corpus_graph(const std::string& name) { return read_graph_file(corpus_path(name + ".json")).graph; }

inline GraphFile corpus_file(const std::string& name) { return read_graph_file(corpus_path(name + ".json")); }

// Two-leg momenta from the file's kinematics block, as the CLI does without flags.
inline MomentumData file_momenta(const GraphFile& gf) {
    MomentumData m = gf.p2 ? MomentumData::two_leg(*gf.p2) : MomentumData::two_leg_symbolic();
    m.mass2 = gf.mass2;
    return m;
}

inline MomentumData triangle_gram() { return gram_from_json(read_json_file(corpus_path("triangle.gram.json"))); }

inline MultiPoly var(std::size_t n, std::size_t i) { return MultiPoly::variable(n, i); }
inline MultiPoly cst(std::size_t n, const Q& c) { return MultiPoly::constant(n, c); }

// Runs fn and returns the kind of the feynpar::Error it throws.
template <class F>
std::optional<ErrorKind> error_kind_of(F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

}  // namespace fpt

#define EXPECT_FEYNPAR_ERROR(stmt, k) EXPECT_EQ(fpt::error_kind_of([&] { stmt; }), std::optional<feynpar::ErrorKind>(k))
