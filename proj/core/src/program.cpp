// SPDX-License-Identifier: Apache-2.0
#include "sepsr/program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sepsr/error.hpp"

namespace sepsr {

namespace gene {

UnaryOp unary_op(int op) {
    switch (op) {
    case kSqrt: return UnaryOp::Sqrt;
    case kLog: return UnaryOp::Log;
    case kCos: return UnaryOp::Cos;
    case kSin: return UnaryOp::Sin;
    case kExp: return UnaryOp::Exp;
    case kSquare: return UnaryOp::Square;
    default: throw InputError("gene " + std::to_string(op) + " is not a unary operator");
    }
}

BinaryOp binary_op(int op) {
    switch (op) {
    case kDivide: return BinaryOp::Divide;
    case kMinus: return BinaryOp::Minus;
    case kPlus: return BinaryOp::Plus;
    case kTimes: return BinaryOp::Times;
    default: throw InputError("gene " + std::to_string(op) + " is not a binary operator");
    }
}

} // namespace gene

namespace {

// Register slots used by the liveness analysis.
constexpr int kRegF = 0;
constexpr int kRegF1 = 1;
constexpr int kRegF2 = 2;

int register_of(int operand) {
    switch (operand) {
    case gene::kF: return kRegF;
    case gene::kF1: return kRegF1;
    case gene::kF2: return kRegF2;
    default: return -1;
    }
}

int copy_target(int code) {
    return code == gene::kCopyF1 ? kRegF1 : code == gene::kCopyF2 ? kRegF2 : -1;
}

ParameterUse combine(int op, ParameterUse a, ParameterUse b) {
    using enum ParameterUse;
    if (gene::is_unary(op)) {
        return a == None ? None : Nonlinear;
    }
    switch (op) {
    case gene::kPlus:
    case gene::kMinus: return std::max(a, b);
    case gene::kTimes:
        if (a == None) {
            return b;
        }
        if (b == None) {
            return a;
        }
        return Nonlinear;
    case gene::kDivide: return b == None ? a : Nonlinear;
    default: return Nonlinear;
    }
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

Program::Program(const ParseMatrix& genome) : dimension_(genome.dimension()) {
    const auto rows = genome.rows();
    canonical_.assign(rows.size(), ParseMatrix::Row{gene::kSkip, 0, 0, gene::kNoCopy});

    // Backward liveness over the three registers.
    std::array<bool, 3> live{true, false, false};
    for (std::size_t i = rows.size(); i-- > 0;) {
        const auto& r = rows[i];
        if (r[0] == gene::kSkip) {
            continue;
        }
        const int target = copy_target(r[3]);
        const bool copy_live = target >= 0 && live[static_cast<std::size_t>(target)];
        if (!live[kRegF] && !copy_live) {
            continue;
        }
        auto& c = canonical_[i];
        c[0] = r[0];
        c[1] = r[1];
        c[2] = gene::is_unary(r[0]) ? 0 : r[2];
        c[3] = copy_live ? r[3] : gene::kNoCopy;
        live[kRegF] = false;
        if (copy_live) {
            live[static_cast<std::size_t>(target)] = false;
        }
        if (const int reg = register_of(c[1]); reg >= 0) {
            live[static_cast<std::size_t>(reg)] = true;
        }
        if (!gene::is_unary(c[0])) {
            if (const int reg = register_of(c[2]); reg >= 0) {
                live[static_cast<std::size_t>(reg)] = true;
            }
        }
    }

    key_.reserve(canonical_.size() * 4);
    for (const auto& c : canonical_) {
        if (c[0] != gene::kSkip) {
            live_.push_back(c);
        }
        for (int v : c) {
            key_.push_back(static_cast<char>(v));
        }
    }

    // Forward pass: dependence of each register on the constant slots.
    std::array<ParameterUse, 3> reg_use{ParameterUse::None, ParameterUse::None, ParameterUse::None};
    std::array<bool, 3> reg_var{false, false, false};
    auto var_of = [&](int operand) {
        const int reg = register_of(operand);
        return reg >= 0 ? reg_var[static_cast<std::size_t>(reg)] : operand >= 1;
    };
    auto use_of = [&](int operand) {
        if (operand == gene::kP1 || operand == gene::kP2) {
            used_[operand == gene::kP1 ? 0 : 1] = true;
            return ParameterUse::Affine;
        }
        const int reg = register_of(operand);
        return reg >= 0 ? reg_use[static_cast<std::size_t>(reg)] : ParameterUse::None;
    };
    for (const auto& c : live_) {
        const ParameterUse a = use_of(c[1]);
        const ParameterUse b = gene::is_unary(c[0]) ? ParameterUse::None : use_of(c[2]);
        reg_use[kRegF] = combine(c[0], a, b);
        reg_var[kRegF] = var_of(c[1]) || (!gene::is_unary(c[0]) && var_of(c[2]));
        if (const int target = copy_target(c[3]); target >= 0) {
            reg_use[static_cast<std::size_t>(target)] = reg_use[kRegF];
            reg_var[static_cast<std::size_t>(target)] = reg_var[kRegF];
        }
    }
    use_ = reg_use[kRegF];
    uses_variables_ = reg_var[kRegF];
}

void Program::run(std::span<const double* const> columns, std::size_t n, std::array<double, 2> params,
                  ProgramWorkspace& ws, std::span<double> out) const {
    if (columns.size() < dimension_) {
        throw InputError("program needs " + std::to_string(dimension_) + " data columns");
    }
    if (out.size() != n) {
        throw InputError("program output buffer has the wrong length");
    }
    for (auto* v : {&ws.f, &ws.f1, &ws.f2, &ws.tmp, &ws.one, &ws.p1, &ws.p2}) {
        v->resize(n);
    }
    std::fill(ws.f.begin(), ws.f.end(), 0.0);
    std::fill(ws.f1.begin(), ws.f1.end(), 0.0);
    std::fill(ws.f2.begin(), ws.f2.end(), 0.0);
    std::fill(ws.one.begin(), ws.one.end(), 1.0);
    if (used_[0]) {
        std::fill(ws.p1.begin(), ws.p1.end(), params[0]);
    }
    if (used_[1]) {
        std::fill(ws.p2.begin(), ws.p2.end(), params[1]);
    }

    auto source = [&](int code) -> const double* {
        switch (code) {
        case gene::kP2: return ws.p2.data();
        case gene::kP1: return ws.p1.data();
        case gene::kF: return ws.f.data();
        case gene::kF2: return ws.f2.data();
        case gene::kF1: return ws.f1.data();
        case gene::kOne: return ws.one.data();
        default: return columns[static_cast<std::size_t>(code - 1)];
        }
    };

    for (const auto& c : live_) {
        const double* a = source(c[1]);
        double* r = ws.tmp.data();
        switch (c[0]) {
        case gene::kSqrt:
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = a[i] >= 0.0 ? std::sqrt(a[i]) : kNaN;
            }
            break;
        case gene::kLog:
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = a[i] > 0.0 ? std::log(a[i]) : kNaN;
            }
            break;
        case gene::kCos:
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = std::cos(a[i]);
            }
            break;
        case gene::kSin:
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = std::sin(a[i]);
            }
            break;
        case gene::kExp:
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = std::exp(a[i]);
            }
            break;
        case gene::kSquare:
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = a[i] * a[i];
            }
            break;
        default: {
            const double* b = source(c[2]);
            switch (c[0]) {
            case gene::kPlus:
                for (std::size_t i = 0; i < n; ++i) {
                    r[i] = a[i] + b[i];
                }
                break;
            case gene::kMinus:
                for (std::size_t i = 0; i < n; ++i) {
                    r[i] = a[i] - b[i];
                }
                break;
            case gene::kTimes:
                for (std::size_t i = 0; i < n; ++i) {
                    r[i] = a[i] * b[i];
                }
                break;
            case gene::kDivide:
                for (std::size_t i = 0; i < n; ++i) {
                    r[i] = std::fabs(b[i]) < kDivisionGuard ? kNaN : a[i] / b[i];
                }
                break;
            default: break;
            }
        }
        }
        std::swap(ws.f, ws.tmp);
        if (c[3] == gene::kCopyF1) {
            std::copy(ws.f.begin(), ws.f.end(), ws.f1.begin());
        } else if (c[3] == gene::kCopyF2) {
            std::copy(ws.f.begin(), ws.f.end(), ws.f2.begin());
        }
    }
    std::copy(ws.f.begin(), ws.f.end(), out.begin());
}

} // namespace sepsr
