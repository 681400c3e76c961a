/*
 * Copyright 2026 The xids Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "core/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <vector>

namespace xids::svg {

namespace {

constexpr const char* kAttackColor = "#ff0d57";
constexpr const char* kNormalColor = "#1e88e5";
constexpr const char* kLimeAttack = "#ff7f0e";
constexpr const char* kLimeNormal = "#1f77b4";

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", std::abs(v) < 0.005 ? 0.0 : v);
  return buf;
}

std::string Short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Open(double width, double height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(width) + "\" height=\"" + Num(height) +
         "\" viewBox=\"0 0 " + Num(width) + " " + Num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
}

std::string Text(double x, double y, const std::string& s, const std::string& anchor = "start") {
  return "<text x=\"" + Num(x) + "\" y=\"" + Num(y) + "\" text-anchor=\"" + anchor + "\">" + Escape(s) + "</text>\n";
}

std::string Rect(double x, double y, double w, double h, const std::string& fill) {
  return "<rect x=\"" + Num(x) + "\" y=\"" + Num(y) + "\" width=\"" + Num(std::max(w, 0.0)) + "\" height=\"" +
         Num(std::max(h, 0.0)) + "\" fill=\"" + fill + "\"/>\n";
}

std::string Line(double x1, double y1, double x2, double y2, const std::string& stroke) {
  return "<line x1=\"" + Num(x1) + "\" y1=\"" + Num(y1) + "\" x2=\"" + Num(x2) + "\" y2=\"" + Num(y2) +
         "\" stroke=\"" + stroke + "\"/>\n";
}

// Blue (low) to red (high) for values in [0, 1].
std::string ValueColor(double v) {
  const double t = std::clamp(v, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(30 + t * (255 - 30)));
  const int g = static_cast<int>(std::lround(136 - t * (136 - 13)));
  const int b = static_cast<int>(std::lround(229 - t * (229 - 87)));
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

const Json& Require(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw UsageError(std::string("svg: report lacks '") + key + "'");
  return *it;
}

}  // namespace

std::string ForcePlot(const Json& force) {
  const double base = Require(force, "base_value").get<double>();
  const double out = Require(force, "model_output").get<double>();
  const Json& pos = Require(force, "positive");
  const Json& neg = Require(force, "negative");
  double lo = std::min(base, out), hi = std::max(base, out);
  double pos_sum = 0, neg_sum = 0;
  for (const auto& s : pos) pos_sum += s["phi"].get<double>();
  for (const auto& s : neg) neg_sum += s["phi"].get<double>();
  lo = std::min({lo, out - pos_sum, base});
  hi = std::max({hi, out - neg_sum, base});
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double width = 900, left = 40, plot = width - 2 * left;
  auto x_of = [&](double v) { return left + (v - lo) / (hi - lo) * plot; };

  std::string svg = Open(width, 150);
  svg += "<g class=\"force-plot\">\n";
  svg += Text(x_of(base), 20, "base value " + Short(base), "middle");
  svg += Line(x_of(base), 25, x_of(base), 110, "#999999");
  svg += Text(x_of(out), 135, "f(x) = " + Short(out), "middle");
  // Positive segments end at the output and extend left; negative start at it.
  double cursor = out;
  for (const auto& s : pos) {
    const double phi = s["phi"].get<double>();
    const double x0 = x_of(cursor - phi), x1 = x_of(cursor);
    svg += "<g class=\"segment\" data-sign=\"positive\" data-feature=\"" + Escape(s["name"].get<std::string>()) + "\">\n";
    svg += Rect(x0, 50, x1 - x0, 30, kAttackColor);
    svg += Text(0.5 * (x0 + x1), 95, s["name"].get<std::string>() + " = " + Short(s["value"].get<double>()), "middle");
    svg += "</g>\n";
    cursor -= phi;
  }
  cursor = out;
  for (const auto& s : neg) {
    const double phi = s["phi"].get<double>();
    const double x0 = x_of(cursor), x1 = x_of(cursor - phi);
    svg += "<g class=\"segment\" data-sign=\"negative\" data-feature=\"" + Escape(s["name"].get<std::string>()) + "\">\n";
    svg += Rect(x0, 50, x1 - x0, 30, kNormalColor);
    svg += Text(0.5 * (x0 + x1), 45, s["name"].get<std::string>() + " = " + Short(s["value"].get<double>()), "middle");
    svg += "</g>\n";
    cursor -= phi;
  }
  svg += Line(x_of(out), 40, x_of(out), 120, "#000000");
  svg += "</g>\n</svg>\n";
  return svg;
}

std::string LimeBars(const Json& attribution, const Json& probabilities) {
  const Json& names = Require(attribution, "feature_names");
  const Json& phi = Require(attribution, "phi");
  const Json& inst = Require(attribution, "instance");
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < phi.size(); ++j) {
    if (phi[j].get<double>() != 0.0) idx.push_back(j);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(phi[a].get<double>()) > std::abs(phi[b].get<double>());
  });
  double scale = 1e-12;
  for (std::size_t j : idx) scale = std::max(scale, std::abs(phi[j].get<double>()));
  const double row = 22, top = 60, width = 760, mid = 480, half = 200;
  std::string svg = Open(width, top + row * static_cast<double>(idx.size()) + 20);
  svg += "<g class=\"lime\">\n";
  if (probabilities.is_array() && probabilities.size() == 2) {
    svg += Text(10, 20, "normal " + Short(probabilities[0].get<double>()) + "   attack " +
                            Short(probabilities[1].get<double>()));
  }
  svg += Text(mid - half, 45, "normal", "start");
  svg += Text(mid + half, 45, "attack", "end");
  svg += Line(mid, top - 8, mid, top + row * static_cast<double>(idx.size()), "#444444");
  double y = top;
  for (std::size_t j : idx) {
    const double v = phi[j].get<double>();
    const double len = std::abs(v) / scale * half;
    const std::string name = j < names.size() ? names[j].get<std::string>() : "f" + std::to_string(j);
    svg += "<g class=\"bar\" data-feature=\"" + Escape(name) + "\">\n";
    svg += v > 0 ? Rect(mid, y, len, row - 6, kLimeAttack) : Rect(mid - len, y, len, row - 6, kLimeNormal);
    svg += Text(10, y + 12, name + " = " + Short(j < inst.size() ? inst[j].get<double>() : 0.0));
    svg += Text(width - 10, y + 12, Short(v), "end");
    svg += "</g>\n";
    y += row;
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

std::string Beeswarm(const Json& summary, int max_features) {
  const Json& names = Require(summary, "feature_names");
  const Json& ranking = Require(summary, "ranking");
  const Json& points = Require(summary, "points");
  if (ranking.empty() || Require(summary, "instances").get<std::size_t>() == 0) {
    throw UsageError("svg: summary has no explained instances");
  }
  const std::size_t shown = std::min<std::size_t>(ranking.size(), static_cast<std::size_t>(std::max(1, max_features)));
  double extent = 1e-12;
  for (std::size_t r = 0; r < shown; ++r) {
    for (const auto& p : points[ranking[r].get<std::size_t>()]["phi"]) extent = std::max(extent, std::abs(p.get<double>()));
  }
  const double row = 26, top = 30, left = 200, plot = 560;
  const double width = left + plot + 40;
  auto x_of = [&](double phi) { return left + (phi / extent * 0.5 + 0.5) * plot; };
  std::string svg = Open(width, top + row * static_cast<double>(shown) + 40);
  svg += "<g class=\"summary\">\n";
  svg += Line(x_of(0), top - 10, x_of(0), top + row * static_cast<double>(shown), "#999999");
  for (std::size_t r = 0; r < shown; ++r) {
    const std::size_t f = ranking[r].get<std::size_t>();
    const double cy = top + row * static_cast<double>(r) + row / 2;
    svg += "<g class=\"feature\" data-feature=\"" + Escape(names[f].get<std::string>()) + "\">\n";
    svg += Text(left - 8, cy + 4, names[f].get<std::string>(), "end");
    const Json& vals = points[f]["value"];
    const Json& phis = points[f]["phi"];
    std::map<long, int> occupancy;
    for (std::size_t k = 0; k < phis.size(); ++k) {
      const double x = x_of(phis[k].get<double>());
      const long bin = std::lround(x / 3.0);
      const int n = occupancy[bin]++;
      const double offset = (n % 2 ? 1 : -1) * 2.0 * ((n + 1) / 2);
      svg += "<circle cx=\"" + Num(x) + "\" cy=\"" + Num(cy + std::clamp(offset, -row / 2 + 2, row / 2 - 2)) +
             "\" r=\"2\" fill=\"" + ValueColor(vals[k].get<double>()) + "\"/>\n";
    }
    svg += "</g>\n";
  }
  const double axis = top + row * static_cast<double>(shown) + 20;
  svg += Text(x_of(-extent), axis, Short(-extent), "middle");
  svg += Text(x_of(0), axis, "SHAP value", "middle");
  svg += Text(x_of(extent), axis, Short(extent), "middle");
  svg += "</g>\n</svg>\n";
  return svg;
}

std::string StackedForce(const Json& stacked) {
  const Json& columns = Require(stacked, "columns");
  const Json& groups = Require(stacked, "groups");
  if (columns.empty()) throw UsageError("svg: stacked force data is empty");
  double lo = 0, hi = 1e-12;
  for (const auto& c : columns) {
    const double base = c["base_value"].get<double>();
    double up = 0, down = 0;
    for (const auto& p : c["phi"]) (p.get<double>() > 0 ? up : down) += p.get<double>();
    lo = std::min({lo, base + down, c["model_output"].get<double>()});
    hi = std::max({hi, base + up, c["model_output"].get<double>()});
  }
  const double col_w = std::max(2.0, std::min(12.0, 800.0 / static_cast<double>(columns.size())));
  const double gap = 10, top = 30, height = 300;
  const double width = 60 + col_w * static_cast<double>(columns.size()) + gap * static_cast<double>(groups.size());
  auto y_of = [&](double v) { return top + (hi - v) / (hi - lo) * height; };
  std::string svg = Open(width, top + height + 40);
  svg += "<g class=\"stacked-force\">\n";
  double x = 40;
  for (const auto& g : groups) {
    const std::size_t start = g["start"].get<std::size_t>();
    const std::size_t count = g["count"].get<std::size_t>();
    svg += "<g class=\"group\" data-label=\"" + Escape(g["label"].get<std::string>()) + "\">\n";
    const double x_start = x;
    for (std::size_t c = start; c < start + count; ++c) {
      const Json& col = columns[c];
      const double base = col["base_value"].get<double>();
      double up = base, down = base;
      for (const auto& p : col["phi"]) {
        const double v = p.get<double>();
        if (v > 0) {
          svg += Rect(x, y_of(up + v), col_w, y_of(up) - y_of(up + v), kAttackColor);
          up += v;
        } else if (v < 0) {
          svg += Rect(x, y_of(down), col_w, y_of(down + v) - y_of(down), kNormalColor);
          down += v;
        }
      }
      x += col_w;
    }
    svg += Text(0.5 * (x_start + x), top + height + 20, g["label"].get<std::string>(), "middle");
    svg += "</g>\n";
    x += gap;
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

std::string Render(const Json& bundle, const std::string& variant) {
  const std::string kind = bundle.value("kind", std::string());
  const Json& payload = Require(bundle, "payload");
  if (kind == "attribution") {
    const Json& attr = Require(payload, "attribution");
    const std::string method = attr.value("method", std::string());
    const Json probs = payload.contains("probabilities") ? payload["probabilities"] : Json();
    if (variant == "lime" || (variant.empty() && method == "lime")) return LimeBars(attr, probs);
    if (variant.empty() || variant == "force") return ForcePlot(Require(payload, "force"));
    throw UsageError("svg: unknown view '" + variant + "' for attribution reports");
  }
  if (kind == "shap_summary") {
    if (variant.empty() || variant == "beeswarm") return Beeswarm(Require(payload, "summary"));
    if (variant == "stacked") return StackedForce(Require(payload, "stacked"));
    throw UsageError("svg: unknown view '" + variant + "' for summary reports");
  }
  throw UsageError("svg: reports of kind '" + kind + "' have no plot");
}

}  // namespace xids::svg
