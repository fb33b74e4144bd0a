#pragma once
#include <string>

namespace tractor {

// Single authoritative statement of the sign and basis conventions; the
// report header carries fnv1a of this string so results can be matched to
// the conventions they were produced under. docs/conventions.md mirrors it.
inline const char* conventions_ledger() {
    return
        "signature (r,s) counts (positive, negative); model form Jn = diag(-I_s, +I_r)\n"
        "tractor basis order (e_-, e_1..e_n, e_+); <x,y> = x_- y_+ + x_+ y_- + x Jn y\n"
        "gauge triple column (d; tau; b), d the preserved-line slot\n"
        "R(X,Y)Z = nab_X nab_Y Z - nab_Y nab_X Z - nab_[X,Y] Z; Ric(Y,Z) = tr(X -> R(X,Y)Z)\n"
        "round sphere has positive scalar curvature\n"
        "K = (scal/(2(n-1)) g - Ric)/(n-2)\n"
        "C(X,Y) = (nab_Y K)(X) - (nab_X K)(Y)\n"
        "connection nab_X (d; tau; b) = (Xd + K(X,tau); nab_X tau - b K(X)# + d X; Xb - g(X,tau))\n"
        "curvature matrix (xi, phi, eta) = (0, W, -C)\n"
        "splitting corners -(1/n) div V top, +(1/n) div V bottom; eta = g(D V, .)\n"
        "D = (tr_g nabla^2 + scal/(2(n-1)))/(n-2)\n"
        "codifferential dual basis w.r.t. the trace form: eta_i = delta^i / 2\n"
        "line-curvature scalar = (i/2) tr(J A)\n";
}

uint64_t conventions_hash();

inline const char* tool_version() { return "1.0.0"; }

} // namespace tractor
