#pragma once

#include <gmpxx.h>

#include <string>

#include "feynpar/error.hpp"

namespace feynpar {

using Q = mpq_class;

inline Q parse_rational(const std::string& s) {
    std::string t;
    for (char c : s)
        if (c != ' ') t += c;
    if (t.empty()) throw Error(ErrorKind::Parse, "empty rational");
    if (t[0] == '+') t = t.substr(1);
    Q q;
    if (q.set_str(t, 10) != 0) throw Error(ErrorKind::Parse, "bad rational '" + s + "'");
    if (q.get_den() == 0) throw Error(ErrorKind::Parse, "zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
}

inline std::string to_string(const Q& q) {
    return q.get_str();
}

// Always "num/den", the on-disk form.
inline std::string to_fraction_string(const Q& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

inline Q q_pow(const Q& base, unsigned e) {
    Q r = 1;
    Q b = base;
    while (e) {
        if (e & 1u) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

}  // namespace feynpar
