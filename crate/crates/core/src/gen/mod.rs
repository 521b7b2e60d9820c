//! Instance generators: UAV grid search and independent-cascade scenarios on
//! road networks.

mod icm;
mod road;
mod uav;

pub use icm::{gen_icm, icm_spread, sensing_stats, IcmConfig, ICM_RESAMPLE_LIMIT};
pub use road::{
    contract_degree2, ingest_road, read_road_files, synthetic_road_network, write_road_files, ContractReport,
    EdgeRecord, NodeRecord, SYNTHETIC_ROAD_SEED, SYNTHETIC_ROAD_SIDE,
};
pub use uav::{default_occlusion_mask, gen_uav, parse_occlusions, UavConfig};
