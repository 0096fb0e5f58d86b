// Builds the genus-2 curve at p = 17, reads off partitions, and certifies that the
// Dwork loop moves A off the theta divisor.

#include <iostream>

#include <thetacert/dwork.hpp>

int main()
{
    using namespace thetacert;
    CtxPtr ctx = make_context(2, 17, 6);
    CurvePtr cc = make_curve(ctx, 400);

    for (const char* text : {"A", "I=0", "I=1,2", "Q=(1,sqrt2)"}) {
        WSpace W = make_space(*cc, parse_divisor(text), 16);
        std::cout << W.label << ": index " << W.index << ", partition (";
        for (size_t i = 0; i < W.partition.size(); ++i) std::cout << (i ? "," : "") << W.partition[i];
        std::cout << "), theta " << to_string(theta_member(W).verdict) << "\n";
    }

    SplitResult sp = split_Tp(*cc);
    std::cout << "e0 = " << sp.e0 << ", splitting residual zero: " << std::boolalpha << sp.residual_zero << "\n";

    WSpace A = make_space(*cc, DivisorSpec::trivial(), theta_basis_count(2, 17, 6));
    Certificate c = theta_avoid(A, Scalar::from_int(ramified_of(ctx), 1));
    std::cout << "h A: " << to_string(c.verdict) << " with " << c.pivots.size() << " pivots\n";
}
