#pragma once

// Frozen reference values for special functions used as independent test
// oracles. Generated once at development time with an arbitrary-precision
// library (30 significant digits, rounded to double).

namespace oracles {

struct bessel_ref {
  double z, j0, j1, y0;
};
inline constexpr bessel_ref kBesselRefs[] = {
    {0.0010000000000000000, 0.99999975000001562, 0.00049999993750000261,
     -4.4714166113759233},
    {0.29999999999999999, 0.97762624653829609, 0.14831881627310400,
     -0.80727357780451949},
    {0.50000000000000000, 0.93846980724081290, 0.24226845767487389,
     -0.44451873350670656},
    {1.0000000000000000, 0.76519768655796655, 0.44005058574493352,
     0.088256964215676958},
    {2.0000000000000000, 0.22389077914123567, 0.57672480775687339,
     0.51037567264974512},
    {3.7000000000000002, -0.39923020337119112, 0.053833987745461791,
     0.10607431532035411},
    {5.0000000000000000, -0.17759677131433830, -0.32757913759146522,
     -0.30851762524903378},
    {8.0000000000000000, 0.17165080713755391, 0.23463634685391462,
     0.22352148938756622},
    {11.500000000000000, -0.067653948111665228, -0.22837862066532347,
     -0.22523211169118787},
    {12.500000000000000, 0.14688405470042110, -0.16548380461475972,
     -0.17121430684466929},
    {14.000000000000000, 0.17107347611045866, 0.13337515469879325,
     0.12719256858218369},
    {20.000000000000000, 0.16702466434058315, 0.066833124175850046,
     0.062640596809383831},
    {33.299999999999997, 0.063338485947521252, 0.12386214790148009,
     0.12289749913503733},
    {50.000000000000000, 0.055812327669251815, -0.097511828125175138,
     -0.098064995470077079},
    {123.40000000000001, -0.071525536719260154, -0.0068509998856543724,
     -0.0065611390519846386},
    {800.00000000000000, 0.0088974458838161348, 0.026775138722323195,
     0.026769572592398645},
};

struct h11_ref {
  double z, re, im;
};
inline constexpr h11_ref kH11Refs[] = {
    {0.50000000000000000, 0.24226845767487389, -1.4714723926702431},
    {2.0000000000000000, 0.57672480775687339, -0.10703243154093755},
    {9.0000000000000000, 0.24531178657332527, 0.10431457519671589},
    {12.500000000000000, -0.16548380461475972, -0.15383825653750118},
    {40.000000000000000, 0.12603831803758500, -0.0057935058215496329},
};

}  // namespace oracles
