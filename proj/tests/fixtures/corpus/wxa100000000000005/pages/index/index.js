const http = require('../../utils/http.js');

Page({
  data: { address: null },

  onShow() {
    http.get('/notices').then((list) => this.setData({ notices: list }));
  },

  pickAddress() {
    wx.chooseAddress({
      success: (res) => {
        this.setData({ address: res });
      },
    });
  },

  saveAddress() {
    const a = this.data.address;
    http.post('/address', { province: a.provinceName, city: a.cityName, detail: a.detailInfo });
  },

  pickTitle() {
    wx.chooseInvoiceTitle({
      success(res) {
        http.post('/invoice', { title: res.title, taxNumber: res.taxNumber });
      },
    });
  },
});
