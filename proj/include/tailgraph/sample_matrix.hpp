#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "tailgraph/vertex_set.hpp"

namespace tailgraph {

struct SampleMeta {
  std::uint64_t seed = 0;
  std::string route;                 // e.g. "mvn", "tail_model", "conditional"
  std::optional<double> t_level;     // set for conditional draws
  std::optional<Vertex> conditioning_vertex;
  std::string margins = "exponential";
};

// n x k array of draws; column j holds the vertex columns[j].
struct SampleMatrix {
  VertexSet columns;
  Eigen::MatrixXd rows;
  SampleMeta meta;

  Eigen::Index n() const noexcept { return rows.rows(); }
  Eigen::Index column_position(Vertex v) const;
  Eigen::VectorXd column(Vertex v) const { return rows.col(column_position(v)); }
};

}  // namespace tailgraph
