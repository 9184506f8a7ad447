#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace odeco {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NonManifoldMesh : public Error {
 public:
  NonManifoldMesh(const std::string& what, std::vector<std::pair<int, int>> edges)
      : Error(what), edges_(std::move(edges)) {}
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

 private:
  std::vector<std::pair<int, int>> edges_;
};

class DegenerateTriangle : public Error {
 public:
  DegenerateTriangle(const std::string& what, std::vector<int> triangles)
      : Error(what), triangles_(std::move(triangles)) {}
  const std::vector<int>& triangles() const { return triangles_; }

 private:
  std::vector<int> triangles_;
};

class NotARotation : public Error {
 public:
  using Error::Error;
};

class NonInvertibleSecondOrderPart : public Error {
 public:
  using Error::Error;
};

class RankDeficientBatch : public Error {
 public:
  using Error::Error;
};

class ConstraintInfeasible : public Error {
 public:
  ConstraintInfeasible(const std::string& what, int vertex) : Error(what), vertex_(vertex) {}
  int vertex() const { return vertex_; }

 private:
  int vertex_;
};

class NaNEnergy : public Error {
 public:
  using Error::Error;
};

}  // namespace odeco
