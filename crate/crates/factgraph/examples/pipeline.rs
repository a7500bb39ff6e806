//! Walk one claim through the whole pipeline: load a small graph, retrieve
//! with each strategy, linearize the evidence, build a prompt, parse a
//! reply, and score it.

use factgraph::dataset::{load_claims, ClaimRecord};
use factgraph::kg::KnowledgeGraph;
use factgraph::metrics::report;
use factgraph::prompt::{build_prompt, parse_response};
use factgraph::retrieval::{retrieve, FallbackPolicy, RetrievalStrategy};
use factgraph::serialize::claim_with_subgraph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dump = "Meyer_Werft\tlocation\tPapenburg\n\
                Meyer_Werft\ttopManager\tBernard_Meyer\n\
                Papenburg\tcountry\tGermany\n";
    let graph = KnowledgeGraph::load_triples(dump.as_bytes())?;
    println!(
        "graph: {} triples, {} entities",
        graph.len(),
        graph.entity_count()
    );

    let claims_jsonl = r#"{"id":"c1","claim":"Meyer Werft is located in Papenburg.","entities":["Meyer_Werft","Papenburg"],"label":true,"types":["one-hop"],"split":"test"}
{"id":"c2","claim":"Meyer Werft is not managed from Germany.","entities":["Meyer_Werft","Germany"],"label":false,"types":["one-hop","negation"],"split":"test"}
"#;
    let claims: Vec<ClaimRecord> = load_claims(claims_jsonl.as_bytes())?;

    for claim in &claims {
        println!("\nclaim {}: {}", claim.id, claim.claim);
        for strategy in RetrievalStrategy::ALL {
            let subgraph = retrieve(
                &graph,
                &claim.entities,
                Some(&claim.claim),
                strategy,
                FallbackPolicy::SingleStepOnEmpty,
            )?;
            println!(
                "  {:<12} {:2} triples{}  {}",
                strategy.tag(),
                subgraph.len(),
                if subgraph.fallback_applied {
                    " (fallback)"
                } else {
                    ""
                },
                claim_with_subgraph(&claim.claim, &subgraph)
            );
        }
    }

    let prompt = build_prompt(&claims, None)?;
    println!("\nprompt ends with:");
    for line in prompt
        .lines()
        .rev()
        .take(3)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
    {
        println!("  {line}");
    }

    let reply = r#"[
        (1, True, "Meyer Werft is indeed located in Papenburg."),
        (2, False, "The shipyard's top manager is Bernard Meyer; the claim misstates it.")
    ]"#;
    let answers = parse_response(reply, claims.len())?;
    let preds: Vec<bool> = answers.iter().map(|a| a.verdict).collect();
    println!("\n{}", report(&preds, &claims)?.render_table());
    Ok(())
}
