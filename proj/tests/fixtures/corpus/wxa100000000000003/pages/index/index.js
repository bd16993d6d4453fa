Page({
  onLoad() {
    this.report();
  },

  report() {
    wx.getSystemInfo({
      success(info) {
        wx.request({
          url: 'https://stat.campus.example.com/device',
          method: 'POST',
          data: { brand: info.brand, model: info.model },
        });
      },
    });
  },

  scan() {
    wx.openBluetoothAdapter({
      success: () => {
        wx.getBluetoothDevices({
          success: (res) => {
            const ids = res.devices.map((d) => d.deviceId);
            wx.request({ url: 'https://stat.campus.example.com/ble', method: 'POST', data: { ids } });
          },
        });
      },
    });
  },
});
