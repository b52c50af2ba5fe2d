#include "routing/rational.hpp"

#include <cctype>

namespace routing {

namespace {

bool valid_integer(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  auto fail = [&] { throw EngineError("malformed rational literal: '" + text + "'"); };
  if (text.empty()) fail();
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::string num = text.substr(0, slash);
    std::string den = text.substr(slash + 1);
    if (!valid_integer(num) || !valid_integer(den)) fail();
    BigInt p(num), q(den);
    if (q == 0) throw EngineError("rational literal with zero denominator: '" + text + "'");
    return Rational(p, q);
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string whole = text.substr(0, dot);
    std::string frac = text.substr(dot + 1);
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    if (!valid_integer(whole) || frac.empty() || !valid_integer(frac) ||
        frac[0] == '-' || frac[0] == '+') {
      fail();
    }
    BigInt scale(1);
    for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
    BigInt w(whole);
    BigInt f(frac);
    bool negative = text[0] == '-';
    BigInt abs_w = w < 0 ? BigInt(-w) : w;
    BigInt num = abs_w * scale + f;
    Rational r(num, scale);
    return negative ? Rational(-r) : r;
  }
  if (!valid_integer(text)) fail();
  return Rational(BigInt(text));
}

std::string format_rational(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

BigInt rational_floor(const Rational& r) {
  BigInt q = numerator(r) / denominator(r);
  if (r < 0 && q * denominator(r) != numerator(r)) q -= 1;
  return q;
}

}  // namespace routing
