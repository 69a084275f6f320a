#pragma once

// Independent brute-force reference implementations used by the tests.

#include <cmath>
#include <cstdlib>
#include <vector>

namespace oracle {

inline bool is_prime(long long n) {
  if (n < 2)
    return false;
  for (long long d = 2; d < n; ++d)
    if (n % d == 0)
      return false;
  return true;
}

inline int digit_sum(long long n) {
  n = std::llabs(n);
  int s = 0;
  for (; n > 0; n /= 10)
    s += static_cast<int>(n % 10);
  return s;
}

inline bool is_square(long long n) {
  for (long long k = 0; k * k <= n; ++k)
    if (k * k == n)
      return true;
  return false;
}

inline bool is_cube(long long n) {
  for (long long k = -200; k <= 200; ++k)
    if (k * k * k == n)
      return true;
  return false;
}

inline bool is_power_of(long long b, long long n) {
  for (long long p = 1; p <= n; p *= b)
    if (p == n)
      return true;
  return false;
}

inline long long floor_mod(long long a, long long m) { return ((a % m) + m) % m; }

inline std::vector<int> range_where(int lo, int hi, bool (*pred)(long long)) {
  std::vector<int> out;
  for (int x = lo; x <= hi; ++x)
    if (pred(x))
      out.push_back(x);
  return out;
}

// Membership for the twelve catalog rules, written from their English descriptions.
inline bool squares(long long x) { return is_square(x); }
inline bool multiples_of_4(long long x) { return x % 4 == 0; }
inline bool odd_numbers(long long x) { return x % 2 != 0; }
inline bool powers_of_2(long long x) { return is_power_of(2, x); }
inline bool even_lt_30(long long x) { return x % 2 == 0 && x < 30; }
inline bool mult_3_or_7(long long x) { return x % 3 == 0 || x % 7 == 0; }
inline bool odd_mult_3(long long x) { return x % 2 != 0 && x % 3 == 0; }
inline bool ends_in_6(long long x) { return x % 10 == 6; }
inline bool digitsum_lt_8(long long x) { return digit_sum(x) < 8; }
inline bool mod9_eq_5(long long x) { return x % 9 == 5; }
inline bool prime_minus_1(long long x) { return is_prime(x + 1); }
inline bool twice_square_minus_2(long long x) {
  for (long long k = 0; 2 * k * k - 2 <= x; ++k)
    if (2 * k * k - 2 == x)
      return true;
  return false;
}

} // namespace oracle
