#pragma once

// Closed-form vector fields of the bundled systems, typed in from their usual
// textbook statements with the conventional parameter values.

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>

namespace oracle {

using Field = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline Eigen::VectorXd v3(double a, double b, double c) {
  Eigen::VectorXd out(3);
  out << a, b, c;
  return out;
}

inline const std::map<std::string, Field>& textbook_fields() {
  static const std::map<std::string, Field> fields = {
      {"Lorenz",
       [](const Eigen::VectorXd& s) {
         const double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
         return v3(sigma * (s[1] - s[0]), s[0] * (rho - s[2]) - s[1], s[0] * s[1] - beta * s[2]);
       }},
      {"Rossler",
       [](const Eigen::VectorXd& s) {
         const double a = 0.2, b = 0.2, c = 5.7;
         return v3(-s[1] - s[2], s[0] + a * s[1], b + s[2] * (s[0] - c));
       }},
      {"Halvorsen",
       [](const Eigen::VectorXd& s) {
         const double a = 1.4;
         return v3(-a * s[0] - 4 * s[1] - 4 * s[2] - s[1] * s[1], -a * s[1] - 4 * s[2] - 4 * s[0] - s[2] * s[2],
                   -a * s[2] - 4 * s[0] - 4 * s[1] - s[0] * s[0]);
       }},
      {"Arneodo",
       [](const Eigen::VectorXd& s) {
         const double a = 5.5, b = 3.5, c = 1.0;
         return v3(s[1], s[2], a * s[0] - b * s[1] - c * s[2] - s[0] * s[0] * s[0]);
       }},
      {"BurkeShaw",
       [](const Eigen::VectorXd& s) {
         const double n = 10.0, v = 13.0;
         return v3(-n * (s[0] + s[1]), -s[1] - n * s[0] * s[2], n * s[0] * s[1] + v);
       }},
      {"NoseHoover",
       [](const Eigen::VectorXd& s) {
         const double a = 1.5;
         return v3(s[1], -s[0] + s[1] * s[2], a - s[1] * s[1]);
       }},
  };
  return fields;
}

}  // namespace oracle
