#include "fk/protocol.hpp"

namespace fk {

using nlohmann::json;

std::string_view to_string(SessionEffectKind k) {
  switch (k) {
    case SessionEffectKind::kAddEphemeral:
      return "add-ephemeral";
    case SessionEffectKind::kRemoveEphemeral:
      return "remove-ephemeral";
    case SessionEffectKind::kClose:
      return "close";
  }
  return "?";
}

json to_json(const WriteRequest& r) {
  json j{{"session", r.session}, {"ticket", r.ticket}, {"op", to_string(r.op)}, {"path", r.path}};
  j["data"] = base64_encode(r.data);
  if (r.version) j["version"] = *r.version;
  if (r.ephemeral) j["ephemeral"] = true;
  if (r.sequential) j["sequential"] = true;
  return j;
}

json to_json(const NodeImage& n) {
  json j{{"path", n.path},
         {"change", to_string(n.change)},
         {"exists", n.version.exists},
         {"data", base64_encode(n.version.data)},
         {"children", n.version.children},
         {"ctxid", n.version.ctxid},
         {"seq_counter", n.version.sequential_counter},
         {"base_mtxid", n.base_mtxid}};
  if (n.version.ephemeral_owner) j["ephemeral_owner"] = *n.version.ephemeral_owner;
  return j;
}

json to_json(const DistributorUpdate& u) {
  json nodes = json::array();
  for (const auto& n : u.nodes) nodes.push_back(to_json(n));
  json effects = json::array();
  for (const auto& e : u.effects) effects.push_back({{"session", e.session}, {"kind", to_string(e.kind)}, {"path", e.path}});
  return json{{"session", u.session},
              {"req", u.request_seq},
              {"ticket", u.ticket},
              {"op", to_string(u.op)},
              {"holder_ts", u.holder.ts},
              {"holder_token", u.holder.token},
              {"nodes", std::move(nodes)},
              {"effects", std::move(effects)},
              {"txid", u.txid},
              {"writer", u.writer_id},
              {"result_path", u.result_path}};
}

json to_json(const WatchDelivery& d) {
  return json{{"watch", d.watch},           {"txid", d.txid},     {"path", d.path},
              {"event", to_string(d.event)}, {"region", d.region}, {"subscribers", d.subscribers},
              {"token", d.token}};
}

}  // namespace fk
