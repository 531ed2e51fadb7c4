//! The shipped mock runtime interface and what each symbol does when it is
//! called without a hook.

/// Interface-definition file of the mock runtime.
pub const MOCK_DECLARATIONS: &str = include_str!("../../assets/interface/cudart_mock.decl");
/// Exported-symbol list of the mock runtime.
pub const MOCK_EXPORTS: &str = include_str!("../../assets/interface/cudart_mock.exports");

/// Native behaviour of an unhooked symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Native {
    Launch,
    /// Blocking variants synchronise on the stream before returning.
    Copy {
        blocking: bool,
    },
    HostFunc,
    DeviceSync,
    StreamSync,
    /// Stream-ordered operation without modeled GPU time.
    Marker {
        blocking: bool,
    },
    Register,
    HostOnly,
}

pub fn native_for(symbol: &str) -> Native {
    match symbol {
        "cudaLaunchKernel" | "cudaLaunchCooperativeKernel" | "cudaLaunchKernel_ptsz" => {
            Native::Launch
        }
        "cudaMemcpy" | "cudaMemcpy2D" | "cudaMemcpyToSymbol" | "cudaMemcpyFromSymbol" => {
            Native::Copy { blocking: true }
        }
        "cudaMemcpyAsync"
        | "cudaMemcpy2DAsync"
        | "cudaMemcpyPeerAsync"
        | "cudaMemcpyAsync_ptsz" => Native::Copy { blocking: false },
        "cudaLaunchHostFunc" => Native::HostFunc,
        "cudaDeviceSynchronize" => Native::DeviceSync,
        "cudaStreamSynchronize" | "cudaEventSynchronize" => Native::StreamSync,
        "cudaMemset" => Native::Marker { blocking: true },
        "cudaMemsetAsync"
        | "cudaEventRecord"
        | "cudaStreamWaitEvent"
        | "cudaMemPrefetchAsync"
        | "cudaGraphLaunch"
        | "cudaStreamQuery" => Native::Marker { blocking: false },
        "__cudaRegisterFunction" => Native::Register,
        _ => Native::HostOnly,
    }
}
